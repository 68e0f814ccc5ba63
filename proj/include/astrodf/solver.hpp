#pragma once

// Adaptive-sampling trust-region solver with diagonal-Hessian coordinate
// models and direct coordinate search.
//
// Each iteration samples the 2d+1 coordinate design points under the
// adaptive rule, fits the diagonal quadratic, solves the trust-region
// subproblem, samples the candidate and then accepts, in order of
// preference, the best design point (direct search), the model candidate,
// or neither.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "astrodf/model.hpp"
#include "astrodf/oracle.hpp"
#include "astrodf/rng.hpp"
#include "astrodf/sampling.hpp"

namespace astrodf::solver {

using Point = std::vector<double>;

struct SolverParams {
  double eta = 0.5;            // model fitness threshold, (0,1)
  double theta = 0.1;          // sufficient reduction constant for direct search
  double mu = 1000.0;          // criticality threshold
  double gamma_expand = 1.5;   // > 1
  double gamma_shrink = 0.75;  // (0,1)
  double kappa_min = 1e-2;
  /// Left empty, these are filled by tune_and_initialize (or, for kappa,
  /// calibrated from the first sample at x0).
  std::optional<double> kappa;
  std::optional<double> delta0;
  std::optional<double> delta_max;
  sampling::LambdaSchedule lambda;
  bool direct_search = true;
  std::uint64_t seed = 0;

  /// Throws ParameterError on any out-of-range value.
  void validate() const;
};

enum class Outcome {
  success_direct_search,
  success_subproblem,
  unsuccessful,
  budget_exhausted,
};

std::string_view to_string(Outcome outcome);
std::optional<Outcome> outcome_from_string(std::string_view text);

inline bool is_success(Outcome o) {
  return o == Outcome::success_direct_search || o == Outcome::success_subproblem;
}

/// The three-way acceptance test of one iteration: direct search first (if
/// enabled), then the model candidate, else unsuccessful.
Outcome classify(const SolverParams& params, double r_hat, double r_tilde, double r_model,
                 double gradient_norm, double delta);

struct IterationRecord {
  std::uint64_t k = 0;
  double delta = 0.0;
  double delta_next = 0.0;
  Outcome outcome = Outcome::unsuccessful;
  double r_hat = 0.0;    // direct search reduction
  double r_tilde = 0.0;  // subproblem candidate reduction
  double r_model = 0.0;  // model-predicted reduction
  double gradient_norm = 0.0;
  std::uint64_t samples = 0;
  double incumbent_estimate = 0.0;
  /// Recommendation after the iteration, stamped with total spend so far.
  Point incumbent;
  std::uint64_t cumulative_budget = 0;
  bool subproblem_fallback = false;
};

/// A point with its running estimate and the substream its replications
/// are drawn from.
struct SampledPoint {
  Point x;
  sampling::SampleRecord record;
  rng::RngState stream;
};

struct SolverState {
  std::uint64_t k = 0;
  SampledPoint incumbent;
  double delta = 0.0;
  double kappa = 0.0;
  oracle::EvaluationBudget budget;
  /// Stream key template; point_serial advances for every fresh point.
  rng::StreamKey next_key;
  std::uint64_t tuning_spend = 0;
  /// Samples spent at x0 by initialize() to calibrate kappa.
  std::uint64_t initial_spend = 0;
  bool finished = false;
  std::vector<IterationRecord> history;
};

/// Fresh state at the problem's x0. With params.kappa unset, x0 is sampled
/// max(2, lambda_0) times and kappa = max(|F(x0)| / delta0^2, kappa_min).
/// Requires params.delta0 and params.delta_max.
SolverState initialize(const oracle::Problem& problem, const SolverParams& params,
                       oracle::EvaluationBudget budget, rng::StreamKey first_key);

/// One full iteration. The state is a value: iterating a copy with the same
/// params reproduces the same draws.
IterationRecord iterate(SolverState& state, const SolverParams& params,
                        const oracle::Problem& problem);

/// Iterate until the budget is exhausted.
void run(SolverState& state, const SolverParams& params, const oracle::Problem& problem);

/// Convenience: initialize + run with oracle streams of macro-replication 0.
SolverState run(const oracle::Problem& problem, const SolverParams& params, std::uint64_t budget);

struct TuningResult {
  SolverParams params;
  SolverState state;
  bool piloted = false;
  std::vector<double> candidate_delta0;
  std::vector<double> candidate_score;
};

inline constexpr std::size_t kDeltaMaxSamplePoints = 100;
inline constexpr double kDefaultBoxHalfWidth = 10.0;

/// Largest pairwise distance among uniform points in the problem's box
/// (or [-10,10]^d).
double estimate_delta_max(const oracle::Problem& problem, rng::RngState stream,
                          std::size_t points = kDeltaMaxSamplePoints);

/// Sets delta_max from random solutions, then pilots delta0 over
/// 0.05 delta_max {0.1, 1, 10} with 1% of the budget each and keeps the
/// (delta0, kappa) with the best final incumbent estimate. The returned
/// state starts at x0 with the pilot spend already charged.
TuningResult tune_and_initialize(const oracle::Problem& problem, SolverParams params,
                                 std::uint64_t total_budget, std::uint64_t macro_rep = 0);

}  // namespace astrodf::solver
