#include <doctest.h>

#include <cmath>
#include <vector>

#include "astrodf/model.hpp"
#include "astrodf/rng.hpp"
#include "astrodf/subproblem.hpp"

using namespace astrodf;
using namespace astrodf::subproblem;
using model::DiagonalQuadraticModel;

namespace {

DiagonalQuadraticModel make(std::vector<double> g, std::vector<double> h) {
  const std::size_t d = g.size();
  return {std::vector<double>(d, 0.0), 0.0, std::move(g), std::move(h), 1.0};
}

DiagonalQuadraticModel random_model(rng::RngState& state, std::size_t d) {
  std::vector<double> g(d), h(d);
  for (std::size_t i = 0; i < d; ++i) {
    g[i] = 4.0 * rng::next_uniform(state) - 2.0;
    h[i] = 6.0 * rng::next_uniform(state) - 3.0;
    // Exercise exact zeros and the hard case now and then.
    if (rng::next_uniform(state) < 0.1) g[i] = 0.0;
  }
  return make(std::move(g), std::move(h));
}

}  // namespace

TEST_CASE("Cauchy step examples") {
  SUBCASE("linear model, boundary") {
    const auto r = cauchy_step(make({2.0}, {0.0}), 1.0);
    CHECK(r.step[0] == -1.0);
    CHECK(r.predicted_reduction == 2.0);
    CHECK(r.cauchy_reduction == 1.0);
  }
  SUBCASE("zero gradient") {
    const auto r = cauchy_step(make({0.0, 0.0}, {-1.0, 3.0}), 2.0);
    CHECK(r.step == std::vector<double>{0.0, 0.0});
    CHECK(r.predicted_reduction == 0.0);
  }
  SUBCASE("convex interior minimum along -G") {
    const auto r = cauchy_step(make({1.0}, {1.0}), 10.0);
    CHECK(r.step[0] == doctest::Approx(-1.0));
    CHECK(r.predicted_reduction == doctest::Approx(0.5));
  }
}

TEST_CASE("exact solve examples") {
  SUBCASE("interior separable minimizer") {
    const auto r = solve_trust_region(make({0.0, 2.0}, {2.0, 2.0}), 10.0);
    CHECK(r.step[0] == 0.0);
    CHECK(r.step[1] == doctest::Approx(-1.0));
    CHECK(r.predicted_reduction == doctest::Approx(1.0));
  }
  SUBCASE("concave model goes to the boundary") {
    const auto r = solve_trust_region(make({1.0, 0.0}, {-2.0, -2.0}), 1.0);
    CHECK(model::norm2(r.step) == doctest::Approx(1.0));
    CHECK(r.predicted_reduction == doctest::Approx(2.0));
    // Either boundary point along the first axis direction -G is optimal;
    // the -e1 one is what a descent-first solve gives.
    CHECK(r.step[0] == doctest::Approx(-1.0));
  }
  SUBCASE("hard case: zero gradient on the most negative curvature") {
    const auto r = solve_trust_region(make({1.0, 0.0}, {1.0, -1.0}), 2.0);
    // nu = 1 gives s1 = -1/2; the rest of the ball goes into coordinate 2.
    CHECK(model::norm2(r.step) == doctest::Approx(2.0));
    CHECK(r.step[0] == doctest::Approx(-0.5));
    CHECK(std::fabs(r.step[1]) == doctest::Approx(std::sqrt(4.0 - 0.25)));
    // Reduction 0.5 - 0.125 + 0.5 * 3.75 = 2.25.
    CHECK(r.predicted_reduction == doctest::Approx(2.25));
  }
  SUBCASE("zero model") {
    const auto r = solve_trust_region(make({0.0, 0.0}, {0.0, 0.0}), 1.0);
    CHECK(r.predicted_reduction == 0.0);
  }
}

TEST_CASE("brute force over the ball never beats the exact solve (d <= 3)") {
  rng::RngState state = rng::seed_state(10);
  for (std::size_t d : {1u, 2u, 3u}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto m = random_model(state, d);
      const double radius = 0.1 + 2.0 * rng::next_uniform(state);
      const auto r = solve_trust_region(m, radius);
      CHECK(model::norm2(r.step) <= radius * (1 + 1e-12));
      const double best = m.value_at_step(r.step);
      double brute = 0.0;
      for (int t = 0; t < 20000; ++t) {
        std::vector<double> s(d);
        for (auto& v : s) v = rng::next_normal(state, 0.0, 1.0);
        const double n = model::norm2(s);
        // Half the samples on the sphere, half scaled into the interior.
        const double scale = (t % 2 == 0 ? 1.0 : rng::next_uniform(state)) * radius / n;
        for (auto& v : s) v *= scale;
        brute = std::min(brute, m.value_at_step(s));
      }
      CHECK(best <= brute + 1e-9);
    }
  }
}

TEST_CASE("fraction of Cauchy decrease with constant one") {
  rng::RngState state = rng::seed_state(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng::next_uniform(state) * 20);
    const auto m = random_model(state, d);
    const double radius = 0.01 + 3.0 * rng::next_uniform(state);
    const auto r = solve_trust_region(m, radius);
    const auto c = cauchy_step(m, radius);
    CHECK(r.predicted_reduction >= r.cauchy_reduction - 1e-12 * (1 + std::fabs(r.predicted_reduction)));
    CHECK(r.predicted_reduction >= c.predicted_reduction - 1e-12 * (1 + std::fabs(r.predicted_reduction)));
    CHECK(c.predicted_reduction >= c.cauchy_reduction - 1e-12 * (1 + std::fabs(c.predicted_reduction)));
  }
}

TEST_CASE("scale covariance") {
  rng::RngState state = rng::seed_state(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = random_model(state, 5);
    const double radius = 0.5 + rng::next_uniform(state);
    const double c = 0.1 + 10.0 * rng::next_uniform(state);
    auto scaled = m;
    for (auto& g : scaled.gradient) g *= c;
    for (auto& h : scaled.hessian_diag) h *= c;
    const auto a = solve_trust_region(m, radius);
    const auto b = solve_trust_region(scaled, radius);
    CHECK(b.predicted_reduction == doctest::Approx(c * a.predicted_reduction).epsilon(1e-8));
    for (std::size_t i = 0; i < 5; ++i) CHECK(b.step[i] == doctest::Approx(a.step[i]).epsilon(1e-7).scale(radius));
  }
}
