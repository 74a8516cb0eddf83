#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "datos/linesearch.hpp"
#include "datos/problems.hpp"

namespace datos {

struct OracleOptions {
  double delta = 0.9;
  /// Requested tolerance on ||x+ - x|| / alpha; clamped below at 1e-16 * scale.
  double tol = 1e-30;
  std::size_t max_iter = 200000;
  double alpha_init = 10.0;
  /// Stop once the residual has not improved for this many iterations.
  std::size_t stagnation_window = 2000;
};

struct OracleResult {
  Vector x;
  double u = 0.0;
  std::size_t iterations = 0;
  bool converged = false;  // tolerance met or numerical stagnation reached
  bool max_iter_reached = false;
  double residual = 0.0;  // ||x+ - x|| / alpha at the returned point's step
};

/// Proximal gradient on u = (1/m) sum f_i + r with halving backtracking. Each
/// iteration seeds the search at min(2 alpha_prev, alpha_init). A step is
/// accepted when it passes the sufficient-decrease test and the curvature test
/// <grad f(x+) - grad f(x), x+ - x> <= (delta / alpha) ||x+ - x||^2.
inline OracleResult centralized_proxgrad(const CompositeProblem& problem, const Vector& x0,
                                         const OracleOptions& options = {}) {
  if (!(options.tol > 0.0)) {
    throw ConfigError("centralized_proxgrad: tolerance must be positive");
  }
  const AverageObjective f{problem};
  const Regularizer& r = problem.regularizer();
  Vector x = x0;
  double fx = f.value(x);
  if (!std::isfinite(fx)) {
    throw NumericalError("centralized_proxgrad: starting point lies outside the domain");
  }

  OracleResult best;
  best.x = x;
  best.u = fx + r.value(x);
  best.residual = std::numeric_limits<double>::infinity();
  double best_residual = std::numeric_limits<double>::infinity();
  std::size_t since_improvement = 0;
  double alpha = options.alpha_init;

  Vector g = f.gradient(x);
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    alpha = std::min(2.0 * alpha, options.alpha_init);
    const double slack = kDecreaseSlack * (1.0 + std::abs(fx));
    Vector next;
    Vector g_next;
    double f_next = 0.0;
    for (;;) {
      next = r.prox(x - alpha * g, alpha);
      f_next = f.value(next);
      if (decrease_margin(fx, g, x, f_next, next, alpha, options.delta) + slack >= 0.0) {
        g_next = f.gradient(next);
        const Vector step = next - x;
        const double step_norm = step.norm();
        const double curvature = (g_next - g).dot(step);
        const double rounding = 8.0 * std::numeric_limits<double>::epsilon() * (g.norm() + g_next.norm()) * step_norm;
        if (curvature <= options.delta / alpha * step_norm * step_norm + rounding) break;
      }
      alpha *= 0.5;
      if (alpha < kAlphaFloor) {
        throw NumericalError("centralized_proxgrad: stepsize underflow");
      }
    }
    const double residual = (next - x).norm() / alpha;
    const double scale = 1.0 + next.norm();
    x = std::move(next);
    fx = f_next;
    g = std::move(g_next);

    // Near the minimizer u is flat to rounding, so the residual picks the
    // returned point.
    const double u = fx + r.value(x);
    if (residual < best.residual || (residual == best.residual && u < best.u)) {
      best.x = x;
      best.u = u;
      best.residual = residual;
    }
    best.iterations = it;

    const double tol = std::max(options.tol, 1e-16 * scale);
    if (residual <= tol) {
      best.x = x;
      best.u = u;
      best.residual = residual;
      best.converged = true;
      return best;
    }
    if (residual < best_residual) {
      best_residual = residual;
      since_improvement = 0;
    } else if (++since_improvement >= options.stagnation_window) {
      best.converged = true;
      return best;
    }
  }
  best.max_iter_reached = true;
  return best;
}

/// Fixed-point residual ||x - prox_r(x - grad f(x))|| (unit step).
inline double kkt_residual(const CompositeProblem& problem, const Vector& x) {
  return (x - problem.regularizer().prox(x - problem.average_gradient(x), 1.0)).norm();
}

}  // namespace datos
