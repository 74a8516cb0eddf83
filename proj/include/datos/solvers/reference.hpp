#pragma once

#include <cstddef>
#include <string>

#include "datos/solvers/common.hpp"
#include "datos/solvers/global_datos.hpp"

namespace datos {

/// Deliberate corruption of the metric, used to prove the equivalence check
/// can fail.
enum class MetricFault {
  kNone,
  kSkipSquareRoot,  // metric = W instead of sqrt(W)
};

/// Explicit operators of the stacked (consensus + slack) reformulation:
/// ell = (I - W)^{1/2}, metric = W^{1/2}, so ell^2 + metric^2 = I.
struct ReferenceOperators {
  Matrix ell;
  Matrix metric;
  Eigen::LDLT<Matrix> gram;  // factorization of ell^2 + metric^2
  Matrix ell_pinv;
};

inline ReferenceOperators make_reference_operators(const MixingMatrix& mixing,
                                                   MetricFault fault = MetricFault::kNone) {
  const Eigen::Index m = mixing.agents();
  ReferenceOperators ops;
  ops.ell = psd_sqrt(Matrix::Identity(m, m) - mixing.w);
  ops.metric = fault == MetricFault::kSkipSquareRoot ? mixing.w : psd_sqrt(mixing.w);
  ops.gram = (ops.ell * ops.ell + ops.metric * ops.metric).ldlt();
  ops.ell_pinv = symmetric_pinv(ops.ell);
  return ops;
}

/// Stacked Davis-Yin iterate. Block 1 is the agents' copies, block 2 the
/// slack variables; t_b2 is identically zero after every prox step.
struct ReferenceState {
  Stack t_b1;
  Stack t_b2;
  Stack s1;
  Stack s2;
  Stack y;
  double alpha_prev = 0.0;
  std::size_t k = 0;
};

/// Matches a DATOS state: T_B1 = X, S1 = S, Y = pinv(ell) D, S2 = -metric Y.
inline ReferenceState reference_from_global(const GlobalState& st, const ReferenceOperators& ops) {
  ReferenceState ref;
  ref.t_b1 = st.x;
  ref.s1 = st.s;
  ref.y = ops.ell_pinv * st.d;
  ref.s2 = -(ops.metric * ref.y);
  ref.t_b2 = Stack::Zero(st.x.rows(), st.x.cols());
  ref.alpha_prev = st.alpha_prev;
  ref.k = st.k;
  return ref;
}

struct ReferenceStep {
  ReferenceState state;
  StepMetrics metrics;
};

/// One Davis-Yin step on the stacked problem.
///
/// The prox of the coupling indicator is taken through its conjugate: Y+
/// minimizes -<U2, metric Y> - <U1, ell Y> + (alpha/2)(|ell Y|^2 + |metric Y|^2)
/// with U = T_B - alpha S - alpha grad, i.e. (ell^2 + metric^2) Y+ =
/// (ell U1 + metric U2) / alpha, then T_A = U - alpha [ell; metric] Y+.
/// The stepsize is halved from alpha_prev until every row of block 1 passes
/// the sufficient-decrease test (which implies the summed test on F).
inline ReferenceStep davis_yin_reference_step(const ReferenceState& st, const CompositeProblem& problem,
                                              const ReferenceOperators& ops, double delta) {
  const Eigen::Index m = st.t_b1.rows();
  const Stack grad = problem.stacked_gradient(st.t_b1);
  Vector f_base(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    f_base(i) = problem.loss(static_cast<std::size_t>(i)).value(st.t_b1.row(i).transpose());
    if (!std::isfinite(f_base(i))) {
      throw NumericalError("reference: iterate left the loss domain");
    }
  }

  double alpha = st.alpha_prev;
  int trials = 1;
  Stack u1, u2, y_next, t_a1, t_a2;
  double worst = 0.0;
  for (;; ++trials) {
    u1 = st.t_b1 - alpha * st.s1 - alpha * grad;
    u2 = st.t_b2 - alpha * st.s2;
    const Stack rhs = (ops.ell * u1 + ops.metric * u2) / alpha;
    y_next = ops.gram.solve(Matrix(rhs));
    t_a1 = u1 - alpha * (ops.ell * y_next);
    t_a2 = u2 - alpha * (ops.metric * y_next);

    worst = std::numeric_limits<double>::infinity();
    bool accepted = true;
    for (Eigen::Index i = 0; i < m && accepted; ++i) {
      const Vector t = t_a1.row(i).transpose();
      const double f_t = problem.loss(static_cast<std::size_t>(i)).value(t);
      const double margin =
          decrease_margin(f_base(i), grad.row(i).transpose(), st.t_b1.row(i).transpose(), f_t, t, alpha, delta);
      accepted = margin + kDecreaseSlack * (1.0 + std::abs(f_base(i))) >= 0.0;
      worst = std::min(worst, margin / (1.0 + std::abs(f_base(i))));
    }
    if (accepted) break;
    alpha *= 0.5;
    if (alpha < kAlphaFloor) {
      throw NumericalError("reference: stepsize underflow after " + std::to_string(trials) + " halvings");
    }
  }

  ReferenceStep out;
  out.state.t_b1 = problem.prox_rows(t_a1 + alpha * st.s1, alpha);
  out.state.t_b2 = Stack::Zero(m, st.t_b1.cols());
  out.state.s1 = st.s1 + (t_a1 - out.state.t_b1) / alpha;
  out.state.s2 = st.s2 + (t_a2 - out.state.t_b2) / alpha;
  out.state.y = std::move(y_next);
  out.state.alpha_prev = alpha;
  out.state.k = st.k + 1;

  out.metrics.alpha = Vector::Constant(m, alpha);
  out.metrics.linesearch_trials.assign(static_cast<std::size_t>(m), trials);
  out.metrics.min_decrease_margin = worst;
  out.metrics.t_a = std::move(t_a1);
  return out;
}

/// D = ell Y view of a reference state, for comparison with DATOS.
inline Stack reference_tracking(const ReferenceState& st, const ReferenceOperators& ops) { return ops.ell * st.y; }

}  // namespace datos
