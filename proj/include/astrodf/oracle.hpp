#pragma once

// Stochastic simulation oracles F(x, xi) and the built-in test problems.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "astrodf/rng.hpp"

namespace astrodf::oracle {

using Point = std::vector<double>;

struct Box {
  Point lo;
  Point hi;
};

/// A stochastic objective. Implementations are immutable after construction
/// and may be shared across threads.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;

  /// One replication F(x, xi). Draws xi from `state` only, in a fixed order.
  virtual double evaluate(std::span<const double> x, rng::RngState& state) const = 0;

  /// f(x) = E[F(x, xi)] when known in closed form.
  virtual std::optional<double> true_objective(std::span<const double>) const {
    return std::nullopt;
  }
  virtual std::optional<double> optimum_value() const { return std::nullopt; }
  virtual Point initial_point() const = 0;
  virtual std::optional<Box> bounding_box() const { return std::nullopt; }
};

using ProblemPtr = std::shared_ptr<const Problem>;

/// F(x, xi) = ||x - x*||^2 + xi, xi ~ N(0, noise_variance).
ProblemPtr noisy_sphere(std::size_t d, double noise_variance, Point optimum, Point x0);
/// Sphere centred at the origin started from (5, ..., 5).
ProblemPtr noisy_sphere(std::size_t d, double noise_variance);

/// Rosenbrock with multiplicative noise on every x_i in the first d-1
/// coordinates: sum_i 100 (x_{i+1} - xi_i x_i^2)^2 + (xi_i x_i - 1)^2.
ProblemPtr rosenbrock_multiplicative(std::size_t d, double xi_mean = 1.0,
                                     double xi_variance = 0.01);

/// Rosenbrock replication with caller-supplied multipliers (d-1 of them).
double rosenbrock_value(std::span<const double> x, std::span<const double> xi);

/// 13-arc stochastic activity network: E[longest path] + sum 1/x_i with
/// exponential arc durations of mean x_i.
ProblemPtr stochastic_activity_network();

namespace san {
inline constexpr std::size_t kNodes = 9;
inline constexpr std::size_t kArcs = 13;
/// Arcs as (from, to), zero-based, listed in topological order of `from`.
extern const std::array<std::pair<int, int>, kArcs> kArcList;
inline constexpr double kMinMean = 0.01;
inline constexpr double kMaxMean = 100.0;
/// Longest source-to-sink path for given arc durations (topological DP).
double longest_path(std::span<const double> durations);
}  // namespace san

/// Problem lookup by name: "sphere", "rosenbrock", "san".
struct ProblemConfig {
  std::string name = "sphere";
  std::size_t dim = 10;
  double noise_variance = 1.0;
  double xi_mean = 1.0;
  double xi_variance = 0.01;
};

/// Throws ParameterError naming the bad field.
ProblemPtr make_problem(const ProblemConfig& config);

struct EvaluationBudget {
  std::uint64_t total = 0;
  std::uint64_t spent = 0;

  std::uint64_t remaining() const noexcept { return total - spent; }
  bool exhausted() const noexcept { return spent >= total; }
};

/// One replication charged to `budget`. Returns nullopt, without drawing,
/// when the budget is already exhausted.
std::optional<double> evaluate_with_budget(const Problem& problem, std::span<const double> x,
                                           rng::RngState& state, EvaluationBudget& budget);

}  // namespace astrodf::oracle
