#pragma once

// Running replication statistics and the adaptive sample-size rule
//
//   N(x) = min{ n >= lambda_k : sigma_hat(x, n) / sqrt(n) <= kappa * delta_k^2 / sqrt(lambda_k) }.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>

#include "astrodf/oracle.hpp"
#include "astrodf/rng.hpp"

namespace astrodf::sampling {

/// One-pass (Welford) mean and sum of squared deviations.
struct SampleRecord {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double value) noexcept {
    ++count;
    const double delta = value - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (value - mean);
  }

  /// Sample variance; +inf below two samples.
  double variance() const noexcept {
    if (count < 2) return std::numeric_limits<double>::infinity();
    return m2 / static_cast<double>(count - 1);
  }

  double standard_error() const noexcept {
    return std::sqrt(variance() / static_cast<double>(count));
  }
};

/// Record of the concatenation of the samples behind `a` and `b`.
SampleRecord merge(const SampleRecord& a, const SampleRecord& b) noexcept;

/// lambda_k = max(base, ceil(scale * ln(k + 2)^exponent)).
struct LambdaSchedule {
  std::uint64_t base = 4;
  double exponent = 1.5;
  double scale = 2.0;

  /// Throws ParameterError when base < 2, exponent <= 1 or scale <= 0.
  void validate() const;
};

std::uint64_t lambda_at(const LambdaSchedule& schedule, std::uint64_t k);

/// Right-hand side kappa * delta^2 / sqrt(lambda).
inline double sampling_threshold(double kappa, double delta, std::uint64_t lambda) noexcept {
  return kappa * delta * delta / std::sqrt(static_cast<double>(lambda));
}

/// True once the record holds enough samples under the rule. The variance
/// estimate needs two samples, so at least max(2, lambda) are required.
inline bool stopping_rule_met(const SampleRecord& record, std::uint64_t lambda,
                              double threshold) noexcept {
  const std::uint64_t floor = lambda < 2 ? 2 : lambda;
  if (record.count < floor) return false;
  return std::sqrt(record.variance() / static_cast<double>(record.count)) <= threshold;
}

enum class SamplingStatus { satisfied, budget_exhausted };

/// Appends draws one at a time until the rule holds. `draw` returns
/// std::optional<double>; nullopt means the budget ran out, in which case
/// the partially grown record is kept.
template <class Draw>
SamplingStatus adaptive_sample(SampleRecord& record, std::uint64_t lambda, double threshold,
                               Draw&& draw) {
  while (!stopping_rule_met(record, lambda, threshold)) {
    const std::optional<double> value = draw();
    if (!value) return SamplingStatus::budget_exhausted;
    record.push(*value);
  }
  return SamplingStatus::satisfied;
}

/// Oracle-backed form: replications of `problem` at `point` from `stream`,
/// charged to `budget`, with lambda = lambda_at(schedule, k).
SamplingStatus adaptive_sample(SampleRecord& record, std::span<const double> point, double delta,
                               std::uint64_t k, double kappa, const LambdaSchedule& schedule,
                               const oracle::Problem& problem, oracle::EvaluationBudget& budget,
                               rng::RngState& stream);

}  // namespace astrodf::sampling
