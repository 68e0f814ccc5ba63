#include "astrodf/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "astrodf/errors.hpp"

namespace astrodf::model {

namespace {
std::atomic<bool> g_gradient_sign_fault{false};
}

namespace testing {
void set_gradient_sign_fault(bool enabled) { g_gradient_sign_fault.store(enabled); }
bool gradient_sign_fault() { return g_gradient_sign_fault.load(); }
}  // namespace testing

double norm2(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

DesignSet build_design_set(std::span<const double> center, double radius) {
  if (!(radius > 0.0)) throw ParameterError("build_design_set: radius must be > 0");
  const std::size_t d = center.size();
  DesignSet set{Point(center.begin(), center.end()), radius, {}};
  set.points.reserve(2 * d + 1);
  set.points.push_back(set.center);
  for (int sign : {1, -1}) {
    for (std::size_t i = 0; i < d; ++i) {
      Point p = set.center;
      p[i] += sign * radius;
      set.points.push_back(std::move(p));
    }
  }
  return set;
}

double DiagonalQuadraticModel::value_at_step(std::span<const double> step) const {
  double v = beta0;
  for (std::size_t i = 0; i < step.size(); ++i) {
    v += step[i] * (gradient[i] + 0.5 * hessian_diag[i] * step[i]);
  }
  return v;
}

double DiagonalQuadraticModel::value(std::span<const double> x) const {
  Point step(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) step[i] = x[i] - center[i];
  return value_at_step(step);
}

Point DiagonalQuadraticModel::gradient_at(std::span<const double> x) const {
  Point g(gradient);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += hessian_diag[i] * (x[i] - center[i]);
  return g;
}

DiagonalQuadraticModel fit(const DesignSet& design, std::span<const double> estimates) {
  const std::size_t d = design.dimension();
  if (estimates.size() != 2 * d + 1) {
    throw ParameterError("fit: expected 2d+1 estimates");
  }
  const double delta = design.radius;
  if (!(delta >= 1e-12 * (1.0 + norm2(design.center)))) {
    throw DegenerateGeometry("fit: trust-region radius too small for central differences");
  }
  const double sign = testing::gradient_sign_fault() ? -1.0 : 1.0;

  DiagonalQuadraticModel m{design.center, estimates[0], Point(d), Point(d), delta};
  const double f0 = estimates[0];
  for (std::size_t i = 0; i < d; ++i) {
    const double fp = estimates[1 + i];
    const double fm = estimates[1 + d + i];
    m.gradient[i] = sign * (fp - fm) / (2.0 * delta);
    m.hessian_diag[i] = (fp + fm - 2.0 * f0) / (delta * delta);
  }
  return m;
}

}  // namespace astrodf::model
