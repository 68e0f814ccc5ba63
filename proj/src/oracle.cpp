#include "astrodf/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "astrodf/errors.hpp"

namespace astrodf::oracle {

namespace {

class NoisySphere final : public Problem {
 public:
  NoisySphere(double noise_variance, Point optimum, Point x0)
      : noise_variance_(noise_variance), optimum_(std::move(optimum)), x0_(std::move(x0)) {}

  std::string name() const override { return "sphere"; }
  std::size_t dimension() const override { return optimum_.size(); }

  double evaluate(std::span<const double> x, rng::RngState& state) const override {
    return squared_distance(x) + rng::next_normal(state, 0.0, noise_variance_);
  }
  std::optional<double> true_objective(std::span<const double> x) const override {
    return squared_distance(x);
  }
  std::optional<double> optimum_value() const override { return 0.0; }
  Point initial_point() const override { return x0_; }

 private:
  double squared_distance(std::span<const double> x) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < optimum_.size(); ++i) {
      const double r = x[i] - optimum_[i];
      sum += r * r;
    }
    return sum;
  }

  double noise_variance_;
  Point optimum_;
  Point x0_;
};

class MultiplicativeRosenbrock final : public Problem {
 public:
  MultiplicativeRosenbrock(std::size_t d, double xi_mean, double xi_variance)
      : d_(d), xi_mean_(xi_mean), xi_variance_(xi_variance) {}

  std::string name() const override { return "rosenbrock"; }
  std::size_t dimension() const override { return d_; }

  double evaluate(std::span<const double> x, rng::RngState& state) const override {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < d_; ++i) {
      const double xi = rng::next_normal(state, xi_mean_, xi_variance_);
      const double a = x[i + 1] - xi * x[i] * x[i];
      const double b = xi * x[i] - 1.0;
      sum += 100.0 * a * a + b * b;
    }
    return sum;
  }

  // Expanded in the moments E[xi] and E[xi^2] of the multiplier.
  std::optional<double> true_objective(std::span<const double> x) const override {
    const double m1 = xi_mean_;
    const double m2 = xi_variance_ + xi_mean_ * xi_mean_;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < d_; ++i) {
      const double xi2 = x[i] * x[i];
      const double y = x[i + 1];
      sum += 100.0 * (y * y - 2.0 * y * xi2 * m1 + xi2 * xi2 * m2) + (xi2 * m2 - 2.0 * x[i] * m1 + 1.0);
    }
    return sum;
  }

  // Minimum of the expectation, only exact for the noiseless multiplier.
  std::optional<double> optimum_value() const override {
    if (xi_mean_ == 1.0 && xi_variance_ == 0.0) return 0.0;
    return std::nullopt;
  }

  Point initial_point() const override {
    Point x0(d_);
    for (std::size_t i = 0; i < d_; ++i) x0[i] = (i % 2 == 0) ? -1.2 : 1.0;
    return x0;
  }
  std::optional<Box> bounding_box() const override {
    return Box{Point(d_, -2.0), Point(d_, 2.0)};
  }

 private:
  std::size_t d_;
  double xi_mean_;
  double xi_variance_;
};

class ActivityNetwork final : public Problem {
 public:
  std::string name() const override { return "san"; }
  std::size_t dimension() const override { return san::kArcs; }

  double evaluate(std::span<const double> x, rng::RngState& state) const override {
    std::array<double, san::kArcs> durations{};
    double penalty = 0.0;
    for (std::size_t i = 0; i < san::kArcs; ++i) {
      const double mean = std::clamp(x[i], san::kMinMean, san::kMaxMean);
      durations[i] = rng::next_exponential(state, mean);
      penalty += 1.0 / mean;
    }
    return san::longest_path(durations) + penalty;
  }

  Point initial_point() const override { return Point(san::kArcs, 1.0); }
  std::optional<Box> bounding_box() const override {
    return Box{Point(san::kArcs, san::kMinMean), Point(san::kArcs, 10.0)};
  }
};

}  // namespace

namespace san {

const std::array<std::pair<int, int>, kArcs> kArcList{{{0, 1},
                                                       {0, 2},
                                                       {1, 2},
                                                       {1, 3},
                                                       {1, 5},
                                                       {2, 5},
                                                       {3, 4},
                                                       {3, 6},
                                                       {4, 5},
                                                       {4, 7},
                                                       {5, 8},
                                                       {6, 7},
                                                       {7, 8}}};

double longest_path(std::span<const double> durations) {
  std::array<double, kNodes> finish{};
  for (std::size_t a = 0; a < kArcs; ++a) {
    const auto [from, to] = kArcList[a];
    finish[to] = std::max(finish[to], finish[from] + durations[a]);
  }
  return finish[kNodes - 1];
}

}  // namespace san

ProblemPtr noisy_sphere(std::size_t d, double noise_variance, Point optimum, Point x0) {
  if (d == 0) throw ParameterError("sphere: dimension must be >= 1");
  if (noise_variance < 0.0) throw ParameterError("sphere: noise_variance must be >= 0");
  if (optimum.size() != d || x0.size() != d) {
    throw ParameterError("sphere: optimum and x0 must have dimension d");
  }
  return std::make_shared<NoisySphere>(noise_variance, std::move(optimum), std::move(x0));
}

ProblemPtr noisy_sphere(std::size_t d, double noise_variance) {
  return noisy_sphere(d, noise_variance, Point(d, 0.0), Point(d, 5.0));
}

double rosenbrock_value(std::span<const double> x, std::span<const double> xi) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - xi[i] * x[i] * x[i];
    const double b = xi[i] * x[i] - 1.0;
    sum += 100.0 * a * a + b * b;
  }
  return sum;
}

ProblemPtr rosenbrock_multiplicative(std::size_t d, double xi_mean, double xi_variance) {
  if (d < 2) throw ParameterError("rosenbrock: dimension must be >= 2");
  if (xi_variance < 0.0) throw ParameterError("rosenbrock: xi_variance must be >= 0");
  return std::make_shared<MultiplicativeRosenbrock>(d, xi_mean, xi_variance);
}

ProblemPtr stochastic_activity_network() { return std::make_shared<ActivityNetwork>(); }

ProblemPtr make_problem(const ProblemConfig& config) {
  if (config.name == "sphere") return noisy_sphere(config.dim, config.noise_variance);
  if (config.name == "rosenbrock") {
    return rosenbrock_multiplicative(config.dim, config.xi_mean, config.xi_variance);
  }
  if (config.name == "san") return stochastic_activity_network();
  throw ParameterError("unknown problem '" + config.name + "' (expected sphere, rosenbrock, san)");
}

std::optional<double> evaluate_with_budget(const Problem& problem, std::span<const double> x,
                                           rng::RngState& state, EvaluationBudget& budget) {
  if (budget.exhausted()) return std::nullopt;
  ++budget.spent;
  return problem.evaluate(x, state);
}

}  // namespace astrodf::oracle
