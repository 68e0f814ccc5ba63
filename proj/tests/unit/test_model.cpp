#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "astrodf/errors.hpp"
#include "astrodf/model.hpp"
#include "astrodf/rng.hpp"

using namespace astrodf;
using namespace astrodf::model;

namespace {

using Fn = std::function<double(const Point&)>;

DiagonalQuadraticModel fit_noiseless(const Fn& f, const Point& center, double delta) {
  const auto design = build_design_set(center, delta);
  std::vector<double> values;
  for (const auto& p : design.points) values.push_back(f(p));
  return fit(design, values);
}

double cubic_sum(const Point& x) {
  double s = 0.0;
  for (double v : x) s += v * v * v;
  return s;
}

Point cubic_grad(const Point& x) {
  Point g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = 3.0 * x[i] * x[i];
  return g;
}

struct Uniform {
  rng::RngState state;
  explicit Uniform(std::uint64_t seed) : state(rng::seed_state(seed)) {}
  double operator()(double lo, double hi) { return lo + (hi - lo) * rng::next_uniform(state); }
};

// Uniform point in the ball of radius r around c (rejection from the cube).
Point ball_point(Uniform& u, const Point& c, double r) {
  for (;;) {
    Point s(c.size());
    for (double& v : s) v = u(-1.0, 1.0);
    if (norm2(s) <= 1.0) {
      for (std::size_t i = 0; i < c.size(); ++i) s[i] = c[i] + r * s[i];
      return s;
    }
  }
}

}  // namespace

TEST_CASE("design set layout") {
  SUBCASE("d = 2 at the origin") {
    const auto s = build_design_set(std::vector<double>{0.0, 0.0}, 1.0);
    const std::vector<Point> expected{{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    CHECK(s.points == expected);
  }
  SUBCASE("d = 1") {
    const auto s = build_design_set(std::vector<double>{3.0}, 0.5);
    CHECK(s.points == std::vector<Point>{{3.0}, {3.5}, {2.5}});
  }
  SUBCASE("any center: 2d+1 points, each in the ball, pairs differ in one coordinate") {
    Uniform u(1);
    for (std::size_t d : {1u, 4u, 13u}) {
      Point c(d);
      for (double& v : c) v = u(-5, 5);
      const double delta = u(0.01, 2.0);
      const auto s = build_design_set(c, delta);
      REQUIRE(s.points.size() == 2 * d + 1);
      double maxdist = 0.0;
      for (const auto& p : s.points) {
        Point diff(d);
        for (std::size_t i = 0; i < d; ++i) diff[i] = p[i] - c[i];
        maxdist = std::max(maxdist, norm2(diff));
      }
      CHECK(maxdist == doctest::Approx(delta).epsilon(1e-12));
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          const double plus = s.points[1 + i][j] - c[j];
          const double minus = s.points[1 + d + i][j] - c[j];
          if (i == j) {
            CHECK(plus == doctest::Approx(delta));
            CHECK(minus == doctest::Approx(-delta));
          } else {
            CHECK(plus == 0.0);
            CHECK(minus == 0.0);
          }
        }
      }
    }
  }
  CHECK_THROWS_AS(build_design_set(std::vector<double>{0.0}, 0.0), ParameterError);
}

TEST_CASE("fit on simple noiseless functions") {
  SUBCASE("constant") {
    const auto m = fit_noiseless([](const Point&) { return 7.0; }, {1.0, 2.0, 3.0, 4.0}, 0.3);
    CHECK(m.beta0 == 7.0);
    for (double g : m.gradient) CHECK(g == 0.0);
    for (double h : m.hessian_diag) CHECK(h == 0.0);
  }
  SUBCASE("sum of squares at the origin") {
    const auto m = fit_noiseless(
        [](const Point& x) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]; }, {0.0, 0.0, 0.0}, 1.0);
    CHECK(m.beta0 == 0.0);
    CHECK(m.gradient == Point{0.0, 0.0, 0.0});
    CHECK(m.hessian_diag == Point{2.0, 2.0, 2.0});
  }
  SUBCASE("linear") {
    const auto m = fit_noiseless([](const Point& x) { return x[0]; }, {0.0, 0.0}, 0.5);
    CHECK(m.gradient == Point{1.0, 0.0});
    CHECK(m.hessian_diag == Point{0.0, 0.0});
  }
  SUBCASE("x1 cubed: gradient error equals delta squared") {
    const auto m = fit_noiseless([](const Point& x) { return x[0] * x[0] * x[0]; }, {0.0}, 0.1);
    // ((0.1)^3 - (-0.1)^3) / 0.2
    const double hand = (0.001 - (-0.001)) / 0.2;
    CHECK(m.gradient[0] == doctest::Approx(hand).epsilon(1e-14));
    CHECK(m.gradient[0] == doctest::Approx(0.01).epsilon(1e-12));
  }
}

TEST_CASE("fit errors") {
  const auto design = build_design_set(std::vector<double>{0.0, 0.0}, 1.0);
  CHECK_THROWS_AS(fit(design, std::vector<double>{1, 2, 3}), ParameterError);
  const auto tiny = build_design_set(std::vector<double>{1e6}, 1e-9);
  CHECK_THROWS_AS(fit(tiny, std::vector<double>{1, 2, 3}), DegenerateGeometry);
}

TEST_CASE("model value and gradient") {
  DiagonalQuadraticModel m{{0.0, 0.0}, 1.0, {1.0, 0.0}, {0.0, 0.0}, 1.0};
  CHECK(m.value(std::vector<double>{1.0, 0.0}) == 2.0);
  CHECK(m.gradient_at(m.center) == m.gradient);

  Uniform u(2);
  DiagonalQuadraticModel r{{0.5, -1.0, 2.0}, 0.3, {1.0, -2.0, 0.5}, {3.0, -1.0, 0.25}, 1.0};
  for (int t = 0; t < 100; ++t) {
    Point x{u(-3, 3), u(-3, 3), u(-3, 3)};
    const Point g = r.gradient_at(x);
    for (std::size_t i = 0; i < 3; ++i) {
      Point xp = x, xm = x;
      xp[i] += 1e-5;
      xm[i] -= 1e-5;
      CHECK(std::fabs((r.value(xp) - r.value(xm)) / 2e-5 - g[i]) <= 1e-6);
    }
  }
}

TEST_CASE("interpolation exactness and reconstruction residual") {
  Uniform u(3);
  for (std::size_t d : {1u, 2u, 10u, 50u, 100u}) {
    for (int trial = 0; trial < 20; ++trial) {
      Point c(d), g(d), h(d);
      const double b0 = u(-10, 10);
      for (std::size_t i = 0; i < d; ++i) {
        c[i] = u(-2, 2);
        g[i] = u(-5, 5);
        h[i] = u(-5, 5);
      }
      const double delta = u(0.05, 1.0);
      const auto design = build_design_set(c, delta);
      std::vector<double> f;
      for (const auto& p : design.points) {
        double v = b0;
        for (std::size_t i = 0; i < d; ++i) {
          const double s = p[i] - c[i];
          v += g[i] * s + 0.5 * h[i] * s * s;
        }
        f.push_back(v);
      }
      const auto m = fit(design, f);
      CHECK(m.beta0 == f[0]);
      double coef_err = 0.0, resid = 0.0, fmax = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        coef_err = std::max({coef_err, std::fabs(m.gradient[i] - g[i]), std::fabs(m.hessian_diag[i] - h[i])});
      }
      for (std::size_t j = 0; j < f.size(); ++j) {
        resid = std::max(resid, std::fabs(m.value(design.points[j]) - f[j]));
        fmax = std::max(fmax, std::fabs(f[j]));
      }
      CHECK(coef_err <= 1e-10);
      CHECK(resid <= 1e-10 * std::max(1.0, fmax));
    }
  }
}

TEST_CASE("error bounds on the noiseless cubic") {
  Uniform u(4);
  const std::size_t d = 5;
  for (int trial = 0; trial < 10; ++trial) {
    const Point c = ball_point(u, Point(d, 0.0), 1.0);
    std::vector<double> errors;
    for (double delta : {0.2, 0.1, 0.05, 0.025}) {
      const auto m = fit_noiseless(cubic_sum, c, delta);
      const Point grad = cubic_grad(c);
      Point diff(d);
      for (std::size_t i = 0; i < d; ++i) diff[i] = m.gradient[i] - grad[i];
      const double err = norm2(diff);
      CHECK(err <= std::sqrt(double(d)) / 6.0 * 6.0 * delta * delta * (1 + 1e-9));
      errors.push_back(err);

      // Lipschitz constant of the gradient over the ball: 6 max |x_i|.
      const double klg = 6.0 * (norm_inf(c) + delta);
      const double hnorm = norm_inf(m.hessian_diag);
      const double keg1 = 5.0 * std::sqrt(2.0 * d) / 2.0 * (klg + hnorm);
      const double kef = keg1 + (klg + hnorm) / 2.0;
      for (int t = 0; t < 100; ++t) {
        const Point x = ball_point(u, c, delta);
        const Point gm = m.gradient_at(x), gf = cubic_grad(x);
        Point gd(d);
        for (std::size_t i = 0; i < d; ++i) gd[i] = gm[i] - gf[i];
        CHECK(norm2(gd) <= keg1 * delta);
        CHECK(std::fabs(m.value(x) - cubic_sum(x)) <= kef * delta * delta);
      }
      CHECK(hnorm <= klg + 2.0 * norm2(grad) / delta);
    }
    // Error is exactly delta^2 per coordinate, so the log-log slope is 2.
    for (std::size_t i = 1; i < errors.size(); ++i) {
      const double slope = std::log(errors[i - 1] / errors[i]) / std::log(2.0);
      CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
    }
  }
}

TEST_CASE("gradient sign fault hook") {
  testing::set_gradient_sign_fault(true);
  const auto m = fit_noiseless([](const Point& x) { return x[0]; }, {0.0}, 0.5);
  testing::set_gradient_sign_fault(false);
  CHECK(m.gradient[0] == -1.0);
  CHECK_FALSE(testing::gradient_sign_fault());
}
