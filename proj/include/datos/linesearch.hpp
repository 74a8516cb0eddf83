#pragma once

#include <cmath>
#include <concepts>
#include <limits>
#include <string>

#include "datos/errors.hpp"
#include "datos/linalg.hpp"

namespace datos {

/// Anything with value(x) and gradient(x) over flat vectors.
template <class F>
concept SmoothObjective = requires(const F& f, const Vector& x) {
  { f.value(x) } -> std::convertible_to<double>;
  { f.gradient(x) } -> std::convertible_to<Vector>;
};

struct LineSearchResult {
  double alpha = 0.0;  // accepted stepsize, alpha_in / 2^(trials-1)
  int trials = 0;      // condition evaluations, >= 1
  Vector candidate;    // x2 + alpha * direction
  double value = 0.0;  // f(candidate)
};

/// Relative slack added to the right-hand side of the decrease test.
inline constexpr double kDecreaseSlack = 1e-12;
inline constexpr double kAlphaFloor = 1e-300;

/// Right-hand side minus left-hand side of
///   f(x+) <= f(x1) + <g1, x+ - x1> + delta/(2 alpha) ||x+ - x1||^2,
/// without slack. Negative means the inequality is violated; +inf/NaN values
/// of f(x+) give -inf.
inline double decrease_margin(double f_x1, const Vector& grad_x1, const Vector& x1, double f_plus,
                              const Vector& x_plus, double alpha, double delta) {
  if (!std::isfinite(f_plus)) return -std::numeric_limits<double>::infinity();
  const Vector step = x_plus - x1;
  return f_x1 + grad_x1.dot(step) + delta / (2.0 * alpha) * step.squaredNorm() - f_plus;
}

/// Backtracking by halving: x+ = x2 + alpha * direction, starting at
/// alpha_in, until the sufficient-decrease test measured from x1 holds.
/// f(x1) and grad f(x1) are supplied by the caller.
template <SmoothObjective F>
LineSearchResult linesearch(double alpha_in, const F& f, const Vector& x1, double f_x1, const Vector& grad_x1,
                            const Vector& x2, const Vector& direction, double delta) {
  if (!(alpha_in > 0.0)) {
    throw ConfigError("linesearch: initial stepsize must be positive");
  }
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw ConfigError("linesearch: delta must lie in (0, 1]");
  }
  if (!std::isfinite(f_x1)) {
    throw NumericalError("linesearch: base point lies outside the loss domain");
  }
  const double slack = kDecreaseSlack * (1.0 + std::abs(f_x1));
  LineSearchResult out;
  out.alpha = alpha_in;
  for (out.trials = 1;; ++out.trials) {
    out.candidate = x2 + out.alpha * direction;
    out.value = f.value(out.candidate);
    if (decrease_margin(f_x1, grad_x1, x1, out.value, out.candidate, out.alpha, delta) + slack >= 0.0) {
      return out;
    }
    out.alpha *= 0.5;
    if (out.alpha < kAlphaFloor) {
      throw NumericalError("linesearch: stepsize underflow after " + std::to_string(out.trials) +
                           " halvings (non-convex or corrupted loss?)");
    }
  }
}

template <SmoothObjective F>
LineSearchResult linesearch(double alpha_in, const F& f, const Vector& x1, const Vector& x2, const Vector& direction,
                            double delta) {
  return linesearch(alpha_in, f, x1, f.value(x1), f.gradient(x1), x2, direction, delta);
}

}  // namespace datos
