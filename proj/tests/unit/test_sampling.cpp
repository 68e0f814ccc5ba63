#include <doctest.h>

#include <cmath>
#include <optional>
#include <vector>

#include "astrodf/errors.hpp"
#include "astrodf/oracle.hpp"
#include "astrodf/rng.hpp"
#include "astrodf/sampling.hpp"

using namespace astrodf;
using namespace astrodf::sampling;

namespace {

struct TwoPass {
  double mean = 0.0;
  double variance = 0.0;
};

TwoPass two_pass(const std::vector<double>& v, std::size_t n) {
  TwoPass out;
  for (std::size_t i = 0; i < n; ++i) out.mean += v[i];
  out.mean /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out.variance += (v[i] - out.mean) * (v[i] - out.mean);
  out.variance /= static_cast<double>(n - 1);
  return out;
}

SampleRecord from(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  SampleRecord r;
  for (std::size_t i = begin; i < end; ++i) r.push(v[i]);
  return r;
}

// Sequence whose running sample standard deviation is exactly 1 from the
// second element on: each new value sits at mean +- sqrt((n+1)/n).
std::vector<double> pinned_sigma_sequence(std::size_t length) {
  std::vector<double> seq{0.0};
  double mean = 0.0, m2 = 0.0;
  for (std::size_t n = 1; n < length; ++n) {
    // Target M2 after n+1 values is n (so variance = 1).
    const double target = static_cast<double>(n);
    const double dn = static_cast<double>(n);
    // M2' = M2 + d^2 n/(n+1) with d = x - mean.
    const double d = std::sqrt((target - m2) * (dn + 1.0) / dn);
    const double x = mean + (n % 2 == 0 ? d : -d);
    seq.push_back(x);
    const double delta = x - mean;
    mean += delta / (dn + 1.0);
    m2 += delta * (x - mean);
  }
  return seq;
}

std::size_t run_rule(const std::vector<double>& seq, std::uint64_t lambda, double threshold) {
  SampleRecord rec;
  std::size_t next = 0;
  adaptive_sample(rec, lambda, threshold, [&]() -> std::optional<double> {
    if (next >= seq.size()) return std::nullopt;
    return seq[next++];
  });
  CHECK(rec.count == next);
  return rec.count;
}

}  // namespace

TEST_CASE("push") {
  SampleRecord r;
  r.push(5.0);
  CHECK(r.count == 1);
  CHECK(r.mean == 5.0);
  CHECK(r.m2 == 0.0);
  CHECK(std::isinf(r.variance()));
  r.push(7.0);
  CHECK(r.count == 2);
  CHECK(r.mean == 6.0);
  CHECK(r.variance() == 2.0);
}

TEST_CASE("streaming and merged statistics agree with two-pass formulas") {
  rng::RngState state = rng::seed_state(1);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng::next_uniform(state) * 60);
    const double offset = 100.0 * (rng::next_uniform(state) - 0.5);
    std::vector<double> v(n);
    for (auto& x : v) x = offset + rng::next_normal(state, 0.0, 4.0);
    const auto ref = two_pass(v, n);
    const auto streamed = from(v, 0, n);
    REQUIRE(streamed.mean == doctest::Approx(ref.mean).epsilon(1e-12));
    REQUIRE(streamed.variance() == doctest::Approx(ref.variance).epsilon(1e-12));
    const std::size_t cut = static_cast<std::size_t>(rng::next_uniform(state) * (n + 1));
    const auto merged = merge(from(v, 0, cut), from(v, cut, n));
    REQUIRE(merged.count == n);
    REQUIRE(merged.mean == doctest::Approx(ref.mean).epsilon(1e-12));
    REQUIRE(merged.variance() == doctest::Approx(ref.variance).epsilon(1e-12));
  }
  SUBCASE("1000 pushes") {
    std::vector<double> v(1000);
    for (auto& x : v) x = rng::next_normal(state, 3.0, 2.0);
    const auto ref = two_pass(v, v.size());
    const auto r = from(v, 0, v.size());
    CHECK(r.mean == doctest::Approx(ref.mean).epsilon(1e-12));
    CHECK(r.variance() == doctest::Approx(ref.variance).epsilon(1e-12));
  }
}

TEST_CASE("lambda schedule") {
  const LambdaSchedule s;
  CHECK(lambda_at(s, 0) == 4);
  CHECK(static_cast<double>(lambda_at(s, 0)) == std::max(4.0, std::ceil(2.0 * std::pow(std::log(2.0), 1.5))));
  CHECK(lambda_at(s, 1000000) >= lambda_at(s, 1000));
  std::uint64_t prev = 0;
  for (std::uint64_t k = 0; k < 100000; k += 7) {
    const auto l = lambda_at(s, k);
    CHECK(l >= prev);
    prev = l;
  }
  const double r2 = double(lambda_at(s, 100)) / 100;
  const double r4 = double(lambda_at(s, 10000)) / 10000;
  const double r6 = double(lambda_at(s, 1000000)) / 1000000;
  CHECK(r4 < r2);
  CHECK(r6 < r4);
  CHECK(r6 < 1e-3);

  LambdaSchedule bad;
  bad.base = 1;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = {};
  bad.exponent = 1.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = {};
  bad.scale = 0.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("stopping rule examples") {
  SUBCASE("zero variance: the lower bound binds") {
    CHECK(run_rule(std::vector<double>(100, 3.0), 5, 1e-9) == 5);
  }
  SUBCASE("pinned sample deviation") {
    const auto seq = pinned_sigma_sequence(200);
    for (std::size_t n = 2; n < 50; ++n) {
      CHECK(std::sqrt(two_pass(seq, n).variance) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(run_rule(seq, 4, 0.5) == 4);
    // 1/sqrt(16) = 0.25 exactly; the relative nudge absorbs roundoff in
    // the running variance.
    CHECK(run_rule(seq, 4, 0.25 * (1 + 1e-12)) == 16);
    CHECK(run_rule(seq, 4, 0.2499) == 17);
  }
  SUBCASE("at least two samples even with lambda below two") {
    CHECK(run_rule(std::vector<double>(10, 1.0), 1, 1.0) == 2);
  }
  SUBCASE("budget exhaustion keeps the partial record") {
    SampleRecord rec;
    int calls = 0;
    const auto status = adaptive_sample(rec, 10, 1e-9, [&]() -> std::optional<double> {
      if (calls == 3) return std::nullopt;
      return static_cast<double>(calls++);
    });
    CHECK(status == SamplingStatus::budget_exhausted);
    CHECK(rec.count == 3);
  }
}

TEST_CASE("stopping rule minimality against a prefix scan") {
  rng::RngState state = rng::seed_state(2);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> seq(300);
    const double sd = 0.1 + 3.0 * rng::next_uniform(state);
    for (auto& v : seq) v = rng::next_normal(state, 1.0, sd * sd);
    const std::uint64_t lambda = 2 + static_cast<std::uint64_t>(rng::next_uniform(state) * 10);
    const double threshold = 0.05 + rng::next_uniform(state);
    std::size_t expected = seq.size();
    for (std::size_t n = std::max<std::size_t>(lambda, 2); n <= seq.size(); ++n) {
      if (std::sqrt(two_pass(seq, n).variance / static_cast<double>(n)) <= threshold) {
        expected = n;
        break;
      }
    }
    REQUIRE(run_rule(seq, lambda, threshold) == expected);
  }
}

TEST_CASE("oracle-backed sampling") {
  const auto p = oracle::noisy_sphere(2, 1.0);
  const std::vector<double> x{1.0, 1.0};
  const LambdaSchedule schedule;
  SUBCASE("reuse: shrinking the radius never lowers n") {
    oracle::EvaluationBudget budget{100000, 0};
    rng::RngState stream = rng::seed_state(3);
    SampleRecord rec;
    std::uint64_t prev = 0;
    for (double delta : {2.0, 1.0, 0.7, 0.5, 0.3}) {
      adaptive_sample(rec, x, delta, 3, 1.0, schedule, *p, budget, stream);
      CHECK(rec.count >= prev);
      CHECK(stopping_rule_met(rec, lambda_at(schedule, 3), sampling_threshold(1.0, delta, lambda_at(schedule, 3))));
      prev = rec.count;
    }
    CHECK(budget.spent == rec.count);
  }
  SUBCASE("budget exhaustion") {
    oracle::EvaluationBudget budget{3, 0};
    rng::RngState stream;
    SampleRecord rec;
    CHECK(adaptive_sample(rec, x, 0.1, 0, 1.0, schedule, *p, budget, stream) ==
          SamplingStatus::budget_exhausted);
    CHECK(rec.count == 3);
    CHECK(budget.exhausted());
  }
  SUBCASE("invalid arguments") {
    oracle::EvaluationBudget budget{10, 0};
    rng::RngState stream;
    SampleRecord rec;
    CHECK_THROWS_AS(adaptive_sample(rec, x, 0.0, 0, 1.0, schedule, *p, budget, stream), ParameterError);
    CHECK_THROWS_AS(adaptive_sample(rec, x, 1.0, 0, 0.0, schedule, *p, budget, stream), ParameterError);
  }
}
