#include "astrodf/sampling.hpp"

#include "astrodf/errors.hpp"

namespace astrodf::sampling {

SampleRecord merge(const SampleRecord& a, const SampleRecord& b) noexcept {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  const double na = static_cast<double>(a.count);
  const double nb = static_cast<double>(b.count);
  const double n = na + nb;
  const double delta = b.mean - a.mean;
  SampleRecord out;
  out.count = a.count + b.count;
  out.mean = a.mean + delta * nb / n;
  out.m2 = a.m2 + b.m2 + delta * delta * na * nb / n;
  return out;
}

void LambdaSchedule::validate() const {
  if (base < 2) throw ParameterError("solver.lambda.base must be >= 2");
  if (!(exponent > 1.0)) throw ParameterError("solver.lambda.exponent must be > 1");
  if (!(scale > 0.0)) throw ParameterError("solver.lambda.scale must be > 0");
}

std::uint64_t lambda_at(const LambdaSchedule& schedule, std::uint64_t k) {
  const double grown =
      std::ceil(schedule.scale * std::pow(std::log(static_cast<double>(k) + 2.0), schedule.exponent));
  const auto value = static_cast<std::uint64_t>(grown);
  return value > schedule.base ? value : schedule.base;
}

SamplingStatus adaptive_sample(SampleRecord& record, std::span<const double> point, double delta,
                               std::uint64_t k, double kappa, const LambdaSchedule& schedule,
                               const oracle::Problem& problem, oracle::EvaluationBudget& budget,
                               rng::RngState& stream) {
  if (!(delta > 0.0)) throw ParameterError("adaptive_sample: delta must be > 0");
  if (!(kappa > 0.0)) throw ParameterError("adaptive_sample: kappa must be > 0");
  const std::uint64_t lambda = lambda_at(schedule, k);
  const double threshold = sampling_threshold(kappa, delta, lambda);
  return adaptive_sample(record, lambda, threshold, [&]() {
    return oracle::evaluate_with_budget(problem, point, stream, budget);
  });
}

}  // namespace astrodf::sampling
