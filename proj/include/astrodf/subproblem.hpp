#pragma once

// Trust-region subproblem for a diagonal quadratic model:
//
//   min_{||s|| <= Delta}  s'G + s'Hs/2,   H = diag(h).

#include <cstddef>
#include <vector>

#include "astrodf/model.hpp"

namespace astrodf::subproblem {

struct StepResult {
  std::vector<double> step;
  /// M(center) - M(center + step).
  double predicted_reduction = 0.0;
  /// 0.5 ||G|| min(||G|| / ||H||, Delta), with ||H|| the spectral norm.
  double cauchy_reduction = 0.0;
  /// Secular root-finder iterations (0 for closed-form cases).
  std::size_t iterations = 0;
  bool fell_back_to_cauchy = false;
};

/// Lower bound on the reduction any fraction-of-Cauchy-decrease step must reach.
double cauchy_bound(const model::DiagonalQuadraticModel& m, double radius);

/// Minimizer of the model along -G inside the ball.
StepResult cauchy_step(const model::DiagonalQuadraticModel& m, double radius);

/// Global minimizer of the model over the ball, via the secular equation
/// sum_i G_i^2 / (h_i + nu)^2 = Delta^2 when the constraint is active.
/// Falls back to the Cauchy step if the root finder does not converge.
StepResult solve_trust_region(const model::DiagonalQuadraticModel& m, double radius);

inline constexpr std::size_t kMaxSecularIterations = 200;

}  // namespace astrodf::subproblem
