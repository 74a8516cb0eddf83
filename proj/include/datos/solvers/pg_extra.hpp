#pragma once

#include <cstddef>

#include "datos/solvers/common.hpp"

namespace datos {

/// PG-EXTRA baseline with a fixed, user-chosen stepsize.
struct PgExtraState {
  Stack x_prev;
  Stack x;
  Stack z;          // pre-prox iterate of the last step
  Stack grad_prev;  // grad F(x_prev), cached
  std::size_t k = 0;
};

struct PgExtraStep {
  PgExtraState state;
  StepMetrics metrics;
};

namespace detail {

inline StepMetrics fixed_step_metrics(Eigen::Index m, double alpha, const Stack& z) {
  StepMetrics metrics;
  metrics.alpha = Vector::Constant(m, alpha);
  metrics.comm = CommCounts{1, 0, 0};
  metrics.min_decrease_margin = std::numeric_limits<double>::infinity();
  metrics.t_a = z;
  return metrics;
}

}  // namespace detail

/// First step: z1 = W x0 - alpha grad F(x0), x1 = prox(z1).
inline PgExtraStep pg_extra_start(const Stack& x0, const CompositeProblem& problem, const MixingMatrix& mixing,
                                  double alpha) {
  if (!(alpha > 0.0)) {
    throw ConfigError("pg_extra: stepsize must be positive");
  }
  PgExtraStep out;
  out.state.x_prev = x0;
  out.state.grad_prev = problem.stacked_gradient(x0);
  out.state.z = mixing.w * x0 - alpha * out.state.grad_prev;
  out.state.x = problem.prox_rows(out.state.z, alpha);
  out.state.k = 1;
  out.metrics = detail::fixed_step_metrics(x0.rows(), alpha, out.state.z);
  return out;
}

/// z+ = z + W x - W_bar x_prev - alpha (grad F(x) - grad F(x_prev)),
/// x+ = prox(z+), with W_bar = (I + W) / 2.
inline PgExtraStep pg_extra_step(const PgExtraState& st, const CompositeProblem& problem, const MixingMatrix& mixing,
                                 double alpha) {
  if (!(alpha > 0.0)) {
    throw ConfigError("pg_extra: stepsize must be positive");
  }
  const Stack grad = problem.stacked_gradient(st.x);
  const Stack w_prev = mixing.w * st.x_prev;
  PgExtraStep out;
  out.state.z = st.z + mixing.w * st.x - 0.5 * (st.x_prev + w_prev) - alpha * (grad - st.grad_prev);
  out.state.x = problem.prox_rows(out.state.z, alpha);
  out.state.x_prev = st.x;
  out.state.grad_prev = grad;
  out.state.k = st.k + 1;
  out.metrics = detail::fixed_step_metrics(st.x.rows(), alpha, out.state.z);
  return out;
}

}  // namespace datos
