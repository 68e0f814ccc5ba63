#pragma once

// Experiment protocol: macro-replications of every solver variant on one
// problem, post-replication of every recommended incumbent, budget-indexed
// trajectories with confidence bands, and solvability profiles.
//
// All variants of an experiment share common random numbers: a
// macro-replication's streams depend only on (master seed, macro_rep,
// purpose, point serial), never on the variant.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "astrodf/oracle.hpp"
#include "astrodf/solver.hpp"

namespace astrodf::harness {

struct Variant {
  std::string name;
  solver::SolverParams params;
};

struct ExperimentSpec {
  std::string experiment_id = "experiment";
  oracle::ProblemConfig problem;
  std::vector<Variant> variants;
  std::uint64_t budget = 1000;
  std::uint64_t macroreps = 1;
  std::uint64_t postreps = 1;
  std::uint64_t seed = 0;
  double alpha = 0.1;

  /// Throws ParameterError on m < 1, l < 1, alpha outside (0,1], no variants.
  void validate() const;
};

/// One recommended solution of one macro-replication. Iteration 0 is x0 at
/// zero spend; row i > 0 follows solver iteration i-1.
struct TrajectoryRow {
  std::string experiment_id;
  std::string variant;
  std::string problem;
  std::uint64_t macro_rep = 0;
  std::uint64_t iteration = 0;
  std::uint64_t cumulative_budget = 0;
  double delta = 0.0;
  std::string outcome;
  std::vector<double> incumbent;
  double post_mean = 0.0;
  double post_stderr = 0.0;

  friend bool operator==(const TrajectoryRow&, const TrajectoryRow&) = default;
};

struct IterationRow {
  std::string experiment_id;
  std::string variant;
  std::string problem;
  std::uint64_t macro_rep = 0;
  solver::IterationRecord record;
};

/// Everything one (variant, macro-rep) job produces.
struct MacroRepResult {
  std::size_t variant_index = 0;
  std::uint64_t macro_rep = 0;
  std::vector<TrajectoryRow> trajectory;
  std::vector<IterationRow> iterations;
  double delta0 = 0.0;
  double delta_max = 0.0;
  std::uint64_t tuning_spend = 0;
};

struct ExperimentResult {
  ExperimentSpec spec;
  /// Ordered by (variant index, macro_rep).
  std::vector<MacroRepResult> runs;

  std::vector<TrajectoryRow> trajectory_rows() const;
  std::vector<IterationRow> iteration_rows() const;
  const MacroRepResult& run(std::size_t variant_index, std::uint64_t macro_rep) const;
};

/// Sample mean and standard error of `count` replications at x.
struct PostEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};
PostEstimate post_replicate(const oracle::Problem& problem, std::span<const double> x,
                            std::uint64_t count, rng::RngState stream);

/// Tune, run and post-replicate one macro-replication.
MacroRepResult run_macrorep(const ExperimentSpec& spec, const oracle::Problem& problem,
                            std::size_t variant_index, std::uint64_t macro_rep);

/// Serial reference execution of all jobs.
ExperimentResult run_experiment_serial(const ExperimentSpec& spec);
/// OpenMP execution over (variant x macro-rep); identical output to the
/// serial path for any thread count.
ExperimentResult run_experiment_parallel(const ExperimentSpec& spec, int threads);
/// threads <= 1 selects the serial path.
ExperimentResult run_experiment(const ExperimentSpec& spec, int threads = 1);

/// Post-replicated value of the last recommendation whose spend is <= budget.
const TrajectoryRow& recommendation_at(const std::vector<TrajectoryRow>& trajectory,
                                       double budget);

struct BandPoint {
  double fraction = 0.0;
  double mean = 0.0;
  double half_width = 0.0;
  std::uint64_t count = 0;
};

/// Two-sided 95% quantile: Student t with m-1 dof for m < 30, else normal.
double confidence_quantile(std::uint64_t m);

/// Mean post-replicated objective across macro-reps at each budget
/// fraction, with a 95% confidence half-width.
std::vector<BandPoint> mean_trajectory(const ExperimentResult& result, std::size_t variant_index,
                                       const std::vector<double>& fractions);

struct ProfilePoint {
  std::string variant;
  double fraction = 0.0;
  double solved = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t count = 0;
};

/// Fraction of (problem, macro-rep) pairs whose recommendation at spend
/// <= t * budget satisfies f - f* <= alpha (f(x0) - f*). Problems without
/// an entry in `optimum` are skipped with a warning on stderr. `budget`
/// maps problem name to its per-macro-rep budget.
std::vector<ProfilePoint> solvability_profile(const std::vector<TrajectoryRow>& rows, double alpha,
                                              const std::map<std::string, double>& optimum,
                                              const std::map<std::string, double>& budget,
                                              const std::vector<double>& fractions);

/// Wilson score 95% interval for k successes in n trials.
std::pair<double, double> binomial_interval(std::uint64_t successes, std::uint64_t trials);

/// Uniform grid {0, 1/steps, ..., 1}.
std::vector<double> fraction_grid(std::size_t steps);

struct SearchPoint {
  std::uint64_t cumulative_budget = 0;
  std::vector<double> point;
  double estimate = 0.0;
};

/// Uniform random search over the problem's box (or [-10,10]^d), each point
/// estimated with a fixed replication count. The first entry is x0 at zero
/// spend; later entries record each improvement.
std::vector<SearchPoint> random_search_baseline(const oracle::Problem& problem,
                                                std::uint64_t budget,
                                                std::uint64_t replications_per_point,
                                                rng::RngState stream);

void write_results_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows);
std::vector<TrajectoryRow> read_results_csv(std::istream& in);
void write_iterations_csv(std::ostream& out, const std::vector<IterationRow>& rows);
void write_profile_csv(std::ostream& out,
                       const std::vector<ProfilePoint>& points);
void write_trajectory_csv(std::ostream& out, const ExperimentResult& result,
                          const std::vector<double>& fractions);

}  // namespace astrodf::harness
