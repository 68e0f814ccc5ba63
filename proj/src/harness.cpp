#include "astrodf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <mutex>

#include <boost/math/distributions/students_t.hpp>
#include <omp.h>

#include "astrodf/csv.hpp"
#include "astrodf/errors.hpp"

namespace astrodf::harness {

namespace {

constexpr double kZ975 = 1.959963984540054;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> jobs_for(const ExperimentSpec& spec) {
  std::vector<std::size_t> out(spec.variants.size() * spec.macroreps);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = j;
  return out;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (macroreps < 1) throw ParameterError("experiment.macroreps must be >= 1");
  if (postreps < 1) throw ParameterError("experiment.postreps must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("experiment.alpha must lie in (0,1]");
  if (variants.empty()) throw ParameterError("experiment.variants must name at least one variant");
  for (const auto& v : variants) v.params.validate();
}

std::vector<TrajectoryRow> ExperimentResult::trajectory_rows() const {
  std::vector<TrajectoryRow> out;
  for (const auto& r : runs) out.insert(out.end(), r.trajectory.begin(), r.trajectory.end());
  return out;
}

std::vector<IterationRow> ExperimentResult::iteration_rows() const {
  std::vector<IterationRow> out;
  for (const auto& r : runs) out.insert(out.end(), r.iterations.begin(), r.iterations.end());
  return out;
}

const MacroRepResult& ExperimentResult::run(std::size_t variant_index,
                                            std::uint64_t macro_rep) const {
  return runs.at(variant_index * spec.macroreps + macro_rep);
}

PostEstimate post_replicate(const oracle::Problem& problem, std::span<const double> x,
                            std::uint64_t count, rng::RngState stream) {
  sampling::SampleRecord rec;
  for (std::uint64_t i = 0; i < count; ++i) rec.push(problem.evaluate(x, stream));
  return PostEstimate{rec.mean, count >= 2 ? rec.standard_error() : kNaN};
}

MacroRepResult run_macrorep(const ExperimentSpec& spec, const oracle::Problem& problem,
                            std::size_t variant_index, std::uint64_t macro_rep) {
  const Variant& variant = spec.variants.at(variant_index);
  solver::SolverParams params = variant.params;
  params.seed = spec.seed;

  solver::TuningResult tuned = solver::tune_and_initialize(problem, params, spec.budget, macro_rep);
  solver::run(tuned.state, tuned.params, problem);

  MacroRepResult out;
  out.variant_index = variant_index;
  out.macro_rep = macro_rep;
  out.delta0 = *tuned.params.delta0;
  out.delta_max = *tuned.params.delta_max;
  out.tuning_spend = tuned.state.tuning_spend;

  auto base_row = [&](std::uint64_t iteration) {
    TrajectoryRow row;
    row.experiment_id = spec.experiment_id;
    row.variant = variant.name;
    row.problem = problem.name();
    row.macro_rep = macro_rep;
    row.iteration = iteration;
    return row;
  };

  TrajectoryRow first = base_row(0);
  first.delta = out.delta0;
  first.outcome = "initial";
  first.incumbent = problem.initial_point();
  out.trajectory.push_back(std::move(first));
  for (const auto& rec : tuned.state.history) {
    TrajectoryRow row = base_row(rec.k + 1);
    row.cumulative_budget = rec.cumulative_budget;
    row.delta = rec.delta_next;
    row.outcome = std::string(solver::to_string(rec.outcome));
    row.incumbent = rec.incumbent;
    out.trajectory.push_back(std::move(row));

    out.iterations.push_back(
        IterationRow{spec.experiment_id, variant.name, problem.name(), macro_rep, rec});
  }

  // Every recommendation of a macro-rep is post-replicated on the same
  // stream, so unchanged incumbents reuse the previous estimate.
  const rng::RngState post_stream =
      rng::stream_for({macro_rep, rng::Purpose::post_replication, 0}, spec.seed);
  const TrajectoryRow* previous = nullptr;
  for (auto& row : out.trajectory) {
    if (previous && previous->incumbent == row.incumbent) {
      row.post_mean = previous->post_mean;
      row.post_stderr = previous->post_stderr;
    } else {
      const PostEstimate est = post_replicate(problem, row.incumbent, spec.postreps, post_stream);
      row.post_mean = est.mean;
      row.post_stderr = est.standard_error;
    }
    previous = &row;
  }
  return out;
}

ExperimentResult run_experiment_serial(const ExperimentSpec& spec) {
  spec.validate();
  const oracle::ProblemPtr problem = oracle::make_problem(spec.problem);
  ExperimentResult result{spec, {}};
  for (std::size_t j : jobs_for(spec)) {
    result.runs.push_back(run_macrorep(spec, *problem, j / spec.macroreps, j % spec.macroreps));
  }
  return result;
}

ExperimentResult run_experiment_parallel(const ExperimentSpec& spec, int threads) {
  spec.validate();
  const oracle::ProblemPtr problem = oracle::make_problem(spec.problem);
  const std::vector<std::size_t> jobs = jobs_for(spec);
  ExperimentResult result{spec, std::vector<MacroRepResult>(jobs.size())};

  std::exception_ptr failure;
  std::mutex failure_mutex;
  const long n = static_cast<long>(jobs.size());
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
  for (long j = 0; j < n; ++j) {
    try {
      const std::size_t job = jobs[static_cast<std::size_t>(j)];
      result.runs[job] = run_macrorep(spec, *problem, job / spec.macroreps, job % spec.macroreps);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, int threads) {
  if (threads <= 1) return run_experiment_serial(spec);
  return run_experiment_parallel(spec, threads);
}

const TrajectoryRow& recommendation_at(const std::vector<TrajectoryRow>& trajectory,
                                       double budget) {
  if (trajectory.empty()) throw ParameterError("recommendation_at: empty trajectory");
  const TrajectoryRow* best = &trajectory.front();
  for (const auto& row : trajectory) {
    if (static_cast<double>(row.cumulative_budget) <= budget) best = &row;
  }
  return *best;
}

double confidence_quantile(std::uint64_t m) {
  if (m < 2) return kNaN;
  if (m >= 30) return kZ975;
  const boost::math::students_t dist(static_cast<double>(m - 1));
  return boost::math::quantile(dist, 0.975);
}

std::vector<BandPoint> mean_trajectory(const ExperimentResult& result, std::size_t variant_index,
                                       const std::vector<double>& fractions) {
  const auto& spec = result.spec;
  std::vector<BandPoint> out;
  for (double t : fractions) {
    sampling::SampleRecord rec;
    for (std::uint64_t r = 0; r < spec.macroreps; ++r) {
      const auto& traj = result.run(variant_index, r).trajectory;
      rec.push(recommendation_at(traj, t * static_cast<double>(spec.budget)).post_mean);
    }
    BandPoint p{t, rec.mean, kNaN, rec.count};
    if (rec.count >= 2) p.half_width = confidence_quantile(rec.count) * rec.standard_error();
    out.push_back(p);
  }
  return out;
}

std::pair<double, double> binomial_interval(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = kZ975 * kZ975;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = kZ975 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // The endpoints are exact at 0 and n successes; the formula can miss
  // them by roundoff.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

std::vector<double> fraction_grid(std::size_t steps) {
  std::vector<double> out;
  for (std::size_t i = 0; i <= steps; ++i) {
    out.push_back(static_cast<double>(i) / static_cast<double>(steps));
  }
  return out;
}

std::vector<ProfilePoint> solvability_profile(const std::vector<TrajectoryRow>& rows, double alpha,
                                              const std::map<std::string, double>& optimum,
                                              const std::map<std::string, double>& budget,
                                              const std::vector<double>& fractions) {
  // (variant, problem, macro_rep) -> trajectory in iteration order.
  std::map<std::tuple<std::string, std::string, std::uint64_t>, std::vector<TrajectoryRow>> groups;
  std::vector<std::string> variant_order;
  for (const auto& row : rows) {
    if (std::find(variant_order.begin(), variant_order.end(), row.variant) == variant_order.end()) {
      variant_order.push_back(row.variant);
    }
    groups[{row.variant, row.problem, row.macro_rep}].push_back(row);
  }

  std::vector<std::string> warned;
  std::vector<ProfilePoint> out;
  for (const auto& variant : variant_order) {
    for (double t : fractions) {
      std::uint64_t solved = 0, total = 0;
      for (auto& [key, traj] : groups) {
        const auto& [v, problem, rep] = key;
        if (v != variant) continue;
        const auto fstar = optimum.find(problem);
        if (fstar == optimum.end()) {
          if (std::find(warned.begin(), warned.end(), problem) == warned.end()) {
            std::cerr << "warning: no optimum for problem '" << problem
                      << "', excluded from the solvability profile\n";
            warned.push_back(problem);
          }
          continue;
        }
        std::sort(traj.begin(), traj.end(),
                  [](const auto& a, const auto& b) { return a.iteration < b.iteration; });
        const double b = budget.at(problem);
        const double initial_gap = traj.front().post_mean - fstar->second;
        const double gap = recommendation_at(traj, t * b).post_mean - fstar->second;
        ++total;
        if (gap <= alpha * initial_gap) ++solved;
      }
      const auto [lo, hi] = binomial_interval(solved, total);
      out.push_back(ProfilePoint{variant, t,
                                 total ? static_cast<double>(solved) / static_cast<double>(total) : 0.0,
                                 lo, hi, total});
    }
  }
  return out;
}

std::vector<SearchPoint> random_search_baseline(const oracle::Problem& problem,
                                                std::uint64_t budget,
                                                std::uint64_t replications_per_point,
                                                rng::RngState stream) {
  if (replications_per_point == 0) {
    throw ParameterError("random_search_baseline: replications_per_point must be >= 1");
  }
  const std::size_t d = problem.dimension();
  const auto box = problem.bounding_box();
  std::vector<SearchPoint> out{{0, problem.initial_point(), kNaN}};
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t spent = 0;
  while (budget - spent >= replications_per_point) {
    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double lo = box ? box->lo[i] : -solver::kDefaultBoxHalfWidth;
      const double hi = box ? box->hi[i] : solver::kDefaultBoxHalfWidth;
      x[i] = lo + (hi - lo) * rng::next_uniform(stream);
    }
    sampling::SampleRecord rec;
    for (std::uint64_t r = 0; r < replications_per_point; ++r) {
      rec.push(problem.evaluate(x, stream));
    }
    spent += replications_per_point;
    if (rec.mean < best) {
      best = rec.mean;
      out.push_back(SearchPoint{spent, std::move(x), rec.mean});
    }
  }
  return out;
}

void write_results_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows) {
  const std::vector<std::string> header{
      "experiment_id", "variant",          "problem",  "macro_rep", "iteration", "cumulative_budget",
      "delta_k",       "outcome",          "incumbent_coords", "post_mean", "post_stderr"};
  csv::write_row(out, header);
  for (const auto& r : rows) {
    const std::vector<std::string> fields{r.experiment_id,
                                          r.variant,
                                          r.problem,
                                          std::to_string(r.macro_rep),
                                          std::to_string(r.iteration),
                                          std::to_string(r.cumulative_budget),
                                          csv::format_double(r.delta),
                                          r.outcome,
                                          csv::join_coords(r.incumbent),
                                          csv::format_double(r.post_mean),
                                          csv::format_double(r.post_stderr)};
    csv::write_row(out, fields);
  }
}

std::vector<TrajectoryRow> read_results_csv(std::istream& in) {
  const csv::Table t = csv::read_table(in);
  const std::size_t c_id = t.column("experiment_id"), c_var = t.column("variant"),
                    c_prob = t.column("problem"), c_rep = t.column("macro_rep"),
                    c_it = t.column("iteration"), c_bud = t.column("cumulative_budget"),
                    c_delta = t.column("delta_k"), c_out = t.column("outcome"),
                    c_x = t.column("incumbent_coords"), c_mean = t.column("post_mean"),
                    c_se = t.column("post_stderr");
  std::vector<TrajectoryRow> rows;
  rows.reserve(t.rows.size());
  for (const auto& f : t.rows) {
    TrajectoryRow r;
    r.experiment_id = f[c_id];
    r.variant = f[c_var];
    r.problem = f[c_prob];
    r.macro_rep = csv::parse_uint(f[c_rep]);
    r.iteration = csv::parse_uint(f[c_it]);
    r.cumulative_budget = csv::parse_uint(f[c_bud]);
    r.delta = csv::parse_double(f[c_delta]);
    r.outcome = f[c_out];
    r.incumbent = csv::split_coords(f[c_x]);
    r.post_mean = csv::parse_double(f[c_mean]);
    r.post_stderr = csv::parse_double(f[c_se]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_iterations_csv(std::ostream& out, const std::vector<IterationRow>& rows) {
  const std::vector<std::string> header{
      "experiment_id", "variant",    "problem", "macro_rep",           "k",
      "delta_k",       "delta_next", "outcome", "r_hat",               "r_tilde",
      "r_model",       "model_gradient_norm",   "samples",             "cumulative_budget",
      "incumbent_estimate",         "subproblem_fallback"};
  csv::write_row(out, header);
  for (const auto& row : rows) {
    const auto& r = row.record;
    const std::vector<std::string> fields{row.experiment_id,
                                          row.variant,
                                          row.problem,
                                          std::to_string(row.macro_rep),
                                          std::to_string(r.k),
                                          csv::format_double(r.delta),
                                          csv::format_double(r.delta_next),
                                          std::string(solver::to_string(r.outcome)),
                                          csv::format_double(r.r_hat),
                                          csv::format_double(r.r_tilde),
                                          csv::format_double(r.r_model),
                                          csv::format_double(r.gradient_norm),
                                          std::to_string(r.samples),
                                          std::to_string(r.cumulative_budget),
                                          csv::format_double(r.incumbent_estimate),
                                          r.subproblem_fallback ? "1" : "0"};
    csv::write_row(out, fields);
  }
}

void write_profile_csv(std::ostream& out, const std::vector<ProfilePoint>& points) {
  const std::vector<std::string> header{"variant", "budget_fraction", "solved_fraction",
                                        "ci_low",  "ci_high",         "pairs"};
  csv::write_row(out, header);
  for (const auto& p : points) {
    const std::vector<std::string> fields{p.variant,
                                          csv::format_double(p.fraction),
                                          csv::format_double(p.solved),
                                          csv::format_double(p.ci_low),
                                          csv::format_double(p.ci_high),
                                          std::to_string(p.count)};
    csv::write_row(out, fields);
  }
}

void write_trajectory_csv(std::ostream& out, const ExperimentResult& result,
                          const std::vector<double>& fractions) {
  const std::vector<std::string> header{"variant", "budget_fraction", "budget",
                                        "mean",    "half_width",      "macroreps"};
  csv::write_row(out, header);
  for (std::size_t v = 0; v < result.spec.variants.size(); ++v) {
    for (const auto& p : mean_trajectory(result, v, fractions)) {
      const std::vector<std::string> fields{
          result.spec.variants[v].name,
          csv::format_double(p.fraction),
          csv::format_double(p.fraction * static_cast<double>(result.spec.budget)),
          csv::format_double(p.mean),
          csv::format_double(p.half_width),
          std::to_string(p.count)};
      csv::write_row(out, fields);
    }
  }
}

}  // namespace astrodf::harness
