#pragma once

#include <cstddef>

#include "datos/solvers/common.hpp"

namespace datos {

/// Live state of the global min-consensus method. X holds the primal rows,
/// S the duals, D the gradient-tracking correction (D stays in range(I - W)).
struct GlobalState {
  Stack x;
  Stack s;
  Stack d;
  double alpha_prev = 0.0;
  std::size_t k = 0;
};

inline GlobalState global_initial_state(Stack x0, Stack s0, double alpha_init) {
  if (x0.rows() != s0.rows() || x0.cols() != s0.cols()) {
    throw ConfigError("global_datos: X0 and S0 shapes differ");
  }
  if (!(alpha_init > 0.0)) {
    throw ConfigError("global_datos: initial stepsize must be positive");
  }
  GlobalState st;
  st.d = Stack::Zero(x0.rows(), x0.cols());
  st.x = std::move(x0);
  st.s = std::move(s0);
  st.alpha_prev = alpha_init;
  return st;
}

struct GlobalStep {
  GlobalState state;
  StepMetrics metrics;
};

/// One iteration: gossip, per-agent backtracking seeded at the previous
/// common stepsize, network-wide min, then the primal/dual/tracking updates.
inline GlobalStep global_datos_step(const GlobalState& st, const CompositeProblem& problem,
                                    const MixingMatrix& mixing, double delta) {
  const Eigen::Index m = st.x.rows();
  const detail::Gossiped g = detail::gossip_step(st.x, st.s, st.d, problem, mixing);
  const detail::AgentSearch search =
      detail::agent_linesearches(problem, st.x, g, Vector::Constant(m, st.alpha_prev), delta);

  double alpha = st.alpha_prev;
  for (const auto& r : search.results) alpha = std::min(alpha, r.alpha);

  GlobalStep out;
  out.metrics.t_a = g.x_half - alpha * g.d_half;
  out.state.x = problem.prox_rows(out.metrics.t_a + alpha * st.s, alpha);
  out.state.s = st.s + (g.x_half - out.state.x - alpha * g.d_half) / alpha;
  out.state.d = g.d_half + (st.x - g.x_half - alpha * g.grad - alpha * st.s) / alpha;
  out.state.alpha_prev = alpha;
  out.state.k = st.k + 1;

  out.metrics.alpha = Vector::Constant(m, alpha);
  out.metrics.linesearch_trials = detail::trials_of(search);
  out.metrics.comm = CommCounts{2, 0, 1};
  out.metrics.min_decrease_margin =
      detail::min_decrease_margin(problem, st.x, g, search, out.metrics.alpha, out.metrics.t_a, delta);
  return out;
}

}  // namespace datos
