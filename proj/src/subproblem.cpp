#include "astrodf/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace astrodf::subproblem {

namespace {

using model::DiagonalQuadraticModel;

double reduction_of(const DiagonalQuadraticModel& m, const std::vector<double>& s) {
  double r = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    r -= s[i] * (m.gradient[i] + 0.5 * m.hessian_diag[i] * s[i]);
  }
  return r;
}

// Keeps ||s|| <= radius against roundoff in the secular solve.
void clip_to_ball(std::vector<double>& s, double radius) {
  const double n = model::norm2(s);
  if (n > radius) {
    const double scale = radius / n;
    for (double& v : s) v *= scale;
  }
}

StepResult finish(const DiagonalQuadraticModel& m, double radius, std::vector<double> s,
                  std::size_t iterations) {
  clip_to_ball(s, radius);
  StepResult out;
  out.predicted_reduction = reduction_of(m, s);
  out.step = std::move(s);
  out.cauchy_reduction = cauchy_bound(m, radius);
  out.iterations = iterations;
  return out;
}

}  // namespace

double cauchy_bound(const DiagonalQuadraticModel& m, double radius) {
  const double g = model::norm2(m.gradient);
  const double h = model::norm_inf(m.hessian_diag);
  const double ratio = h > 0.0 ? g / h : std::numeric_limits<double>::infinity();
  return 0.5 * g * std::min(ratio, radius);
}

StepResult cauchy_step(const DiagonalQuadraticModel& m, double radius) {
  const std::size_t d = m.dimension();
  const double gnorm = model::norm2(m.gradient);
  std::vector<double> s(d, 0.0);
  if (gnorm == 0.0) return finish(m, radius, std::move(s), 0);

  double curvature = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    curvature += m.hessian_diag[i] * m.gradient[i] * m.gradient[i];
  }
  curvature /= gnorm * gnorm;
  const double t = curvature > 0.0 ? std::min(gnorm / curvature, radius) : radius;
  for (std::size_t i = 0; i < d; ++i) s[i] = -t * m.gradient[i] / gnorm;
  return finish(m, radius, std::move(s), 0);
}

StepResult solve_trust_region(const DiagonalQuadraticModel& m, double radius) {
  const std::size_t d = m.dimension();
  const auto& h = m.hessian_diag;
  const double gnorm = model::norm2(m.gradient);
  const double hmin = *std::min_element(h.begin(), h.end());
  const double nu_low = std::max(0.0, -hmin);

  // Components at or below the numerical-zero threshold carry no descent.
  std::vector<double> g(m.gradient);
  for (double& v : g) {
    if (std::fabs(v) <= 1e-14 * gnorm) v = 0.0;
  }

  auto step_at = [&](double nu) {
    std::vector<double> s(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      if (g[i] != 0.0) s[i] = -g[i] / (h[i] + nu);
    }
    return s;
  };

  // Coordinates whose shifted curvature vanishes at nu_low.
  bool singular_has_gradient = false;
  std::size_t first_singular = d;
  for (std::size_t i = 0; i < d; ++i) {
    if (h[i] + nu_low == 0.0) {
      if (first_singular == d) first_singular = i;
      singular_has_gradient |= g[i] != 0.0;
    }
  }

  if (!singular_has_gradient) {
    std::vector<double> s = step_at(nu_low);
    const double norm = model::norm2(s);
    if (norm <= radius) {
      // Interior minimizer, or the hard case: fill the rest of the ball
      // along the most negative curvature coordinate.
      if (nu_low > 0.0 && first_singular < d) {
        s[first_singular] = std::sqrt(std::max(0.0, radius * radius - norm * norm));
      }
      return finish(m, radius, std::move(s), 0);
    }
  }

  // Boundary solution: ||s(nu)|| = radius for a unique nu > nu_low.
  auto secular = [&](double nu, double& psi, double& dpsi) {
    double phi2 = 0.0, cube = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      if (g[i] == 0.0) continue;
      const double denom = h[i] + nu;
      const double gi2 = g[i] * g[i];
      phi2 += gi2 / (denom * denom);
      cube += gi2 / (denom * denom * denom);
    }
    const double phi = std::sqrt(phi2);
    psi = 1.0 / phi - 1.0 / radius;
    dpsi = cube / (phi2 * phi);
    return phi;
  };

  double lo = nu_low;
  double hi = nu_low + model::norm2(g) / radius;
  double nu = hi;
  for (std::size_t it = 1; it <= kMaxSecularIterations; ++it) {
    double psi = 0.0, dpsi = 0.0;
    const double phi = secular(nu, psi, dpsi);
    if (std::fabs(phi - radius) <= 1e-10 * radius) {
      StepResult out = finish(m, radius, step_at(nu), it);
      if (out.predicted_reduction < reduction_of(m, cauchy_step(m, radius).step)) {
        StepResult c = cauchy_step(m, radius);
        c.iterations = it;
        c.fell_back_to_cauchy = true;
        return c;
      }
      return out;
    }
    if (psi < 0.0) {
      lo = nu;
    } else {
      hi = nu;
    }
    double next = nu - psi / dpsi;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == lo || next == hi) {
      // Bracket exhausted at machine precision; hi is feasible.
      return finish(m, radius, step_at(hi), it);
    }
    nu = next;
  }

  StepResult c = cauchy_step(m, radius);
  c.iterations = kMaxSecularIterations;
  c.fell_back_to_cauchy = true;
  return c;
}

}  // namespace astrodf::subproblem
