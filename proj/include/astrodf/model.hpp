#pragma once

// Coordinate-basis interpolation sets and quadratic models with a diagonal
// Hessian. With the 2d+1 points {x0, x0 +/- Delta e_i} the interpolation
// system has the closed-form solution
//
//   beta0 = F(x0)
//   G_i   = (F(x0 + Delta e_i) - F(x0 - Delta e_i)) / (2 Delta)
//   H_i   = (F(x0 + Delta e_i) + F(x0 - Delta e_i) - 2 F(x0)) / Delta^2
//
// so no linear solve is needed.

#include <span>
#include <vector>

namespace astrodf::model {

using Point = std::vector<double>;

/// Points in the order [x0, x0+Delta e_1..e_d, x0-Delta e_1..e_d].
struct DesignSet {
  Point center;
  double radius = 0.0;
  std::vector<Point> points;

  std::size_t dimension() const noexcept { return center.size(); }
};

DesignSet build_design_set(std::span<const double> center, double radius);

struct DiagonalQuadraticModel {
  Point center;
  double beta0 = 0.0;
  Point gradient;
  Point hessian_diag;
  double radius = 0.0;

  std::size_t dimension() const noexcept { return center.size(); }

  /// beta0 + s'G + s'Hs/2 with s = x - center.
  double value(std::span<const double> x) const;
  /// Value at center + step.
  double value_at_step(std::span<const double> step) const;
  /// G + H (x - center), elementwise.
  Point gradient_at(std::span<const double> x) const;
};

/// Fit from the 2d+1 estimates, ordered as the design set points. Throws
/// DegenerateGeometry for radius < 1e-12 (1 + ||center||) and
/// ParameterError when the value count is not 2d+1.
DiagonalQuadraticModel fit(const DesignSet& design, std::span<const double> estimates);

double norm2(std::span<const double> v);
double norm_inf(std::span<const double> v);

namespace testing {
/// Fault injection for the self-test: when set, fit() flips the sign of the
/// central-difference gradient.
void set_gradient_sign_fault(bool enabled);
bool gradient_sign_fault();
}  // namespace testing

}  // namespace astrodf::model
