#include "astrodf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "astrodf/errors.hpp"
#include "astrodf/subproblem.hpp"

namespace astrodf::solver {

namespace {

constexpr std::uint64_t kPilotSerialSpacing = std::uint64_t{1} << 40;

SampledPoint fresh_point(Point x, SolverState& state, const SolverParams& params) {
  SampledPoint p{std::move(x), {}, rng::stream_for(state.next_key, params.seed)};
  ++state.next_key.point_serial;
  return p;
}

sampling::SamplingStatus sample(SampledPoint& p, const SolverState& state,
                                const SolverParams& params, const oracle::Problem& problem,
                                oracle::EvaluationBudget& budget) {
  return sampling::adaptive_sample(p.record, p.x, state.delta, state.k, state.kappa, params.lambda,
                                   problem, budget, p.stream);
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void SolverParams::validate() const {
  if (!(eta > 0.0 && eta < 1.0)) throw ParameterError("solver.eta must lie in (0,1)");
  if (!(theta > 0.0)) throw ParameterError("solver.theta must be > 0");
  if (!(mu > 0.0)) throw ParameterError("solver.mu must be > 0");
  if (!(gamma_expand > 1.0)) throw ParameterError("solver.gamma_expand must be > 1");
  if (!(gamma_shrink > 0.0 && gamma_shrink < 1.0)) {
    throw ParameterError("solver.gamma_shrink must lie in (0,1)");
  }
  if (!(kappa_min > 0.0)) throw ParameterError("solver.kappa_min must be > 0");
  if (kappa && !(*kappa > 0.0)) throw ParameterError("solver.kappa must be > 0");
  if (delta0 && !(*delta0 > 0.0)) throw ParameterError("solver.delta0 must be > 0");
  if (delta_max && !(*delta_max > 0.0)) throw ParameterError("solver.delta_max must be > 0");
  if (delta0 && delta_max && *delta0 > *delta_max) {
    throw ParameterError("solver.delta0 must not exceed solver.delta_max");
  }
  lambda.validate();
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::success_direct_search: return "success_direct_search";
    case Outcome::success_subproblem: return "success_subproblem";
    case Outcome::unsuccessful: return "unsuccessful";
    case Outcome::budget_exhausted: return "budget_exhausted";
  }
  return "unknown";
}

std::optional<Outcome> outcome_from_string(std::string_view text) {
  for (Outcome o : {Outcome::success_direct_search, Outcome::success_subproblem,
                    Outcome::unsuccessful, Outcome::budget_exhausted}) {
    if (to_string(o) == text) return o;
  }
  return std::nullopt;
}

Outcome classify(const SolverParams& params, double r_hat, double r_tilde, double r_model,
                 double gradient_norm, double delta) {
  if (params.direct_search && r_hat > std::max(r_tilde, params.theta * delta * delta)) {
    return Outcome::success_direct_search;
  }
  if (r_tilde >= params.eta * r_model && params.mu * gradient_norm >= delta) {
    return Outcome::success_subproblem;
  }
  return Outcome::unsuccessful;
}

SolverState initialize(const oracle::Problem& problem, const SolverParams& params,
                       oracle::EvaluationBudget budget, rng::StreamKey first_key) {
  params.validate();
  if (!params.delta0 || !params.delta_max) {
    throw ParameterError("initialize: delta0 and delta_max must be set (see tune_and_initialize)");
  }
  SolverState state;
  state.delta = *params.delta0;
  state.budget = budget;
  state.next_key = first_key;
  state.incumbent = fresh_point(problem.initial_point(), state, params);

  if (params.kappa) {
    state.kappa = *params.kappa;
  } else {
    const std::uint64_t n0 = std::max<std::uint64_t>(2, sampling::lambda_at(params.lambda, 0));
    auto& inc = state.incumbent;
    while (inc.record.count < n0) {
      const auto v = oracle::evaluate_with_budget(problem, inc.x, inc.stream, state.budget);
      if (!v) break;
      inc.record.push(*v);
    }
    state.initial_spend = inc.record.count;
    const double f0 = inc.record.count > 0 ? std::fabs(inc.record.mean) : 0.0;
    state.kappa = std::max(f0 / (state.delta * state.delta), params.kappa_min);
  }
  state.finished = state.budget.exhausted();
  return state;
}

IterationRecord iterate(SolverState& state, const SolverParams& params,
                        const oracle::Problem& problem) {
  const std::uint64_t spent_before = state.budget.spent;
  const std::size_t d = problem.dimension();
  const double delta = state.delta;

  IterationRecord rec;
  rec.k = state.k;
  rec.delta = delta;
  rec.r_hat = rec.r_tilde = rec.r_model = rec.gradient_norm = kNaN;

  auto exhausted = [&]() {
    rec.outcome = Outcome::budget_exhausted;
    rec.delta_next = delta;
    rec.samples = state.budget.spent - spent_before;
    rec.incumbent = state.incumbent.x;
    rec.incumbent_estimate = state.incumbent.record.mean;
    rec.cumulative_budget = state.budget.spent;
    state.finished = true;
    state.history.push_back(rec);
    return rec;
  };

  if (state.budget.exhausted()) return exhausted();

  // Design set: the incumbent's record is topped up, the 2d others are fresh.
  const model::DesignSet design = model::build_design_set(state.incumbent.x, delta);
  std::vector<SampledPoint> points;
  points.reserve(2 * d + 1);
  if (sample(state.incumbent, state, params, problem, state.budget) ==
      sampling::SamplingStatus::budget_exhausted) {
    return exhausted();
  }
  for (std::size_t i = 1; i < design.points.size(); ++i) {
    points.push_back(fresh_point(design.points[i], state, params));
    if (sample(points.back(), state, params, problem, state.budget) ==
        sampling::SamplingStatus::budget_exhausted) {
      return exhausted();
    }
  }

  std::vector<double> estimates;
  estimates.reserve(2 * d + 1);
  estimates.push_back(state.incumbent.record.mean);
  for (const auto& p : points) estimates.push_back(p.record.mean);
  const model::DiagonalQuadraticModel m = model::fit(design, estimates);
  rec.gradient_norm = model::norm2(m.gradient);

  const subproblem::StepResult step = subproblem::solve_trust_region(m, delta);
  rec.subproblem_fallback = step.fell_back_to_cauchy;
  Point candidate_x = state.incumbent.x;
  for (std::size_t i = 0; i < d; ++i) candidate_x[i] += step.step[i];
  SampledPoint candidate = fresh_point(std::move(candidate_x), state, params);
  if (sample(candidate, state, params, problem, state.budget) ==
      sampling::SamplingStatus::budget_exhausted) {
    return exhausted();
  }

  // Best design point; ties go to the lowest index, so the center wins ties.
  std::size_t best = 0;
  for (std::size_t i = 1; i < estimates.size(); ++i) {
    if (estimates[i] < estimates[best]) best = i;
  }
  const double f_inc = estimates[0];
  rec.r_hat = f_inc - estimates[best];
  rec.r_tilde = f_inc - candidate.record.mean;
  rec.r_model = step.predicted_reduction;

  rec.outcome = classify(params, rec.r_hat, rec.r_tilde, rec.r_model, rec.gradient_norm, delta);
  switch (rec.outcome) {
    case Outcome::success_direct_search:
      state.incumbent = std::move(points[best - 1]);
      state.delta = std::min(params.gamma_expand * delta, *params.delta_max);
      break;
    case Outcome::success_subproblem:
      state.incumbent = std::move(candidate);
      state.delta = std::min(params.gamma_expand * delta, *params.delta_max);
      break;
    default:
      state.delta = params.gamma_shrink * delta;
      break;
  }

  rec.delta_next = state.delta;
  rec.samples = state.budget.spent - spent_before;
  rec.incumbent = state.incumbent.x;
  rec.incumbent_estimate = state.incumbent.record.mean;
  rec.cumulative_budget = state.budget.spent;
  ++state.k;
  state.finished = state.budget.exhausted();
  state.history.push_back(rec);
  return rec;
}

void run(SolverState& state, const SolverParams& params, const oracle::Problem& problem) {
  while (!state.finished) iterate(state, params, problem);
}

SolverState run(const oracle::Problem& problem, const SolverParams& params, std::uint64_t budget) {
  SolverState state = initialize(problem, params, oracle::EvaluationBudget{budget, 0},
                                 rng::StreamKey{0, rng::Purpose::oracle, 0});
  run(state, params, problem);
  return state;
}

double estimate_delta_max(const oracle::Problem& problem, rng::RngState stream, std::size_t points) {
  const std::size_t d = problem.dimension();
  const auto box = problem.bounding_box();
  std::vector<Point> sample(points, Point(d));
  for (auto& p : sample) {
    for (std::size_t i = 0; i < d; ++i) {
      const double lo = box ? box->lo[i] : -kDefaultBoxHalfWidth;
      const double hi = box ? box->hi[i] : kDefaultBoxHalfWidth;
      p[i] = lo + (hi - lo) * rng::next_uniform(stream);
    }
  }
  double best = 0.0;
  for (std::size_t a = 0; a < points; ++a) {
    for (std::size_t b = a + 1; b < points; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double r = sample[a][i] - sample[b][i];
        s += r * r;
      }
      best = std::max(best, s);
    }
  }
  return std::sqrt(best);
}

TuningResult tune_and_initialize(const oracle::Problem& problem, SolverParams params,
                                 std::uint64_t total_budget, std::uint64_t macro_rep) {
  TuningResult out;
  if (!params.delta_max) {
    params.delta_max = estimate_delta_max(
        problem, rng::stream_for({macro_rep, rng::Purpose::harness, 0}, params.seed));
  }
  const double base = 0.05 * *params.delta_max;
  if (params.delta0) {
    out.candidate_delta0 = {*params.delta0};
  } else {
    out.candidate_delta0 = {0.1 * base, base, 10.0 * base};
  }

  const std::uint64_t pilot_budget = total_budget / 100;
  const std::uint64_t n0 = std::max<std::uint64_t>(2, sampling::lambda_at(params.lambda, 0));
  const std::uint64_t one_iteration = (2 * problem.dimension() + 2) * n0;
  const bool can_pilot = out.candidate_delta0.size() > 1 && total_budget >= 100 &&
                         pilot_budget >= one_iteration;

  std::uint64_t spent = 0;
  if (can_pilot) {
    double best_score = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    std::optional<double> best_kappa;
    for (std::size_t c = 0; c < out.candidate_delta0.size(); ++c) {
      SolverParams pilot = params;
      pilot.delta0 = std::min(out.candidate_delta0[c], *params.delta_max);
      SolverState s = initialize(
          problem, pilot, oracle::EvaluationBudget{pilot_budget, 0},
          rng::StreamKey{macro_rep, rng::Purpose::tuning, c * kPilotSerialSpacing});
      run(s, pilot, problem);
      spent += s.budget.spent;
      const double score = s.incumbent.record.count > 0 ? s.incumbent.record.mean
                                                        : std::numeric_limits<double>::infinity();
      out.candidate_score.push_back(score);
      if (score < best_score) {
        best_score = score;
        best_index = c;
        best_kappa = s.kappa;
      }
    }
    params.delta0 = std::min(out.candidate_delta0[best_index], *params.delta_max);
    if (!params.kappa) params.kappa = best_kappa;
    out.piloted = true;
  } else {
    const double middle = out.candidate_delta0[out.candidate_delta0.size() / 2];
    params.delta0 = std::min(middle, *params.delta_max);
  }

  out.state = initialize(problem, params, oracle::EvaluationBudget{total_budget, spent},
                         rng::StreamKey{macro_rep, rng::Purpose::oracle, 0});
  out.state.tuning_spend = spent;
  out.params = std::move(params);
  return out;
}

}  // namespace astrodf::solver
