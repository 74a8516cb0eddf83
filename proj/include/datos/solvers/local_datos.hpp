#pragma once

#include <cstddef>
#include <string>

#include "datos/solvers/common.hpp"

namespace datos {

/// Dual update of the local variant.
enum class DualUpdate {
  kConsistent,  // S + Lambda^{-1}(X_half - X+) - D_half; equals the global update when Lambda = alpha I
  kAsPrinted,   // S + Lambda^{-1}(X_half - X+ - D_half)
};

/// Which agents enter the local stepsize min.
enum class Neighborhood {
  kClosed,  // {i} U N(i)
  kOpen,    // N(i)
};

struct LocalOptions {
  DualUpdate dual_update = DualUpdate::kConsistent;
  Neighborhood neighborhood = Neighborhood::kClosed;
};

struct LocalState {
  Stack x;
  Stack s;
  Stack d;
  Vector lambda_prev;  // per-agent stepsizes from the previous iteration
  std::size_t k = 0;
};

inline LocalState local_initial_state(Stack x0, Stack s0, double alpha_init) {
  if (x0.rows() != s0.rows() || x0.cols() != s0.cols()) {
    throw ConfigError("local_datos: X0 and S0 shapes differ");
  }
  if (!(alpha_init > 0.0)) {
    throw ConfigError("local_datos: initial stepsize must be positive");
  }
  LocalState st;
  st.d = Stack::Zero(x0.rows(), x0.cols());
  st.lambda_prev = Vector::Constant(x0.rows(), alpha_init);
  st.x = std::move(x0);
  st.s = std::move(s0);
  return st;
}

/// One round of neighbor min: out_i = min over the (closed or open)
/// neighborhood of values_j.
inline Vector local_min_consensus(const Graph& graph, const Vector& values, Neighborhood hood) {
  if (static_cast<std::size_t>(values.size()) != graph.agents()) {
    throw ConfigError("local_min_consensus: size mismatch");
  }
  Vector out(values.size());
  for (std::size_t i = 0; i < graph.agents(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    double best = hood == Neighborhood::kClosed ? values(idx) : std::numeric_limits<double>::infinity();
    for (std::size_t j : graph.neighbors(i)) best = std::min(best, values(static_cast<Eigen::Index>(j)));
    // An isolated agent (m = 1) with the open reading keeps its own value.
    out(idx) = std::isfinite(best) ? best : values(idx);
  }
  return out;
}

struct LocalStep {
  LocalState state;
  StepMetrics metrics;
};

/// One iteration of the local min-consensus method: each agent backtracks
/// from its own previous stepsize, takes the min over its neighborhood, and
/// the tracking variable uses (I - W) Lambda^{-1} X in place of the global
/// correction.
inline LocalStep local_datos_step(const LocalState& st, const CompositeProblem& problem, const MixingMatrix& mixing,
                                  const Graph& graph, double delta, const LocalOptions& options = {}) {
  const Eigen::Index m = st.x.rows();
  if (st.lambda_prev.size() != m || (st.lambda_prev.array() <= 0.0).any()) {
    throw ConfigError("local_datos: stepsizes must be positive, one per agent");
  }
  const detail::Gossiped g = detail::gossip_step(st.x, st.s, st.d, problem, mixing);
  const detail::AgentSearch search = detail::agent_linesearches(problem, st.x, g, st.lambda_prev, delta);

  Vector accepted(m);
  for (Eigen::Index i = 0; i < m; ++i) accepted(i) = search.results[static_cast<std::size_t>(i)].alpha;
  const Vector alpha = local_min_consensus(graph, accepted, options.neighborhood);
  const Vector inv_alpha = alpha.cwiseInverse();

  const Stack scaled_x = inv_alpha.asDiagonal() * st.x;
  const Stack d_lambda = scaled_x - mixing.w * scaled_x;

  LocalStep out;
  out.metrics.t_a = g.x_half - alpha.asDiagonal() * g.d_half;
  out.state.x = problem.prox_rows(out.metrics.t_a + alpha.asDiagonal() * st.s, alpha);
  if (options.dual_update == DualUpdate::kConsistent) {
    out.state.s = st.s + inv_alpha.asDiagonal() * (g.x_half - out.state.x) - g.d_half;
  } else {
    out.state.s = st.s + inv_alpha.asDiagonal() * (g.x_half - out.state.x - g.d_half);
  }
  out.state.d = g.d_half + d_lambda - g.grad - st.s;
  out.state.lambda_prev = alpha;
  out.state.k = st.k + 1;

  out.metrics.alpha = alpha;
  out.metrics.linesearch_trials = detail::trials_of(search);
  out.metrics.comm = CommCounts{2, 2, 0};
  out.metrics.min_decrease_margin =
      detail::min_decrease_margin(problem, st.x, g, search, alpha, out.metrics.t_a, delta);
  return out;
}

}  // namespace datos
