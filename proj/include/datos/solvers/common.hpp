#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "datos/linesearch.hpp"
#include "datos/netgraph.hpp"
#include "datos/problems.hpp"
#include "datos/solvers/state.hpp"

namespace datos::detail {

/// Gossip stage of both DATOS variants: X_half = W X, D_half = W (grad F(X) + S + D).
struct Gossiped {
  Stack grad;
  Stack x_half;
  Stack d_half;
};

inline Gossiped gossip_step(const Stack& x, const Stack& s, const Stack& d, const CompositeProblem& problem,
                            const MixingMatrix& mixing) {
  if (x.rows() != mixing.agents() || static_cast<std::size_t>(x.rows()) != problem.agents()) {
    throw ConfigError("solver: agent count mismatch between state, problem and mixing matrix");
  }
  Gossiped out;
  out.grad = problem.stacked_gradient(x);
  out.x_half = mixing.w * x;
  out.d_half = mixing.w * (out.grad + s + d);
  return out;
}

struct AgentSearch {
  std::vector<LineSearchResult> results;
  Vector f_x;  // f_i(x_i)
};

/// Every agent backtracks on its own loss from its own seed.
inline AgentSearch agent_linesearches(const CompositeProblem& problem, const Stack& x, const Gossiped& g,
                                      const Vector& seeds, double delta) {
  const Eigen::Index m = x.rows();
  AgentSearch out;
  out.f_x.resize(m);
  out.results.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const SmoothLoss& loss = problem.loss(static_cast<std::size_t>(i));
    const Vector xi = x.row(i).transpose();
    out.f_x(i) = loss.value(xi);
    out.results.push_back(linesearch(seeds(i), loss, xi, out.f_x(i), g.grad.row(i).transpose(),
                                     g.x_half.row(i).transpose(), -g.d_half.row(i).transpose(), delta));
  }
  return out;
}

/// Normalized sufficient-decrease margin at the stepsizes actually used.
inline double min_decrease_margin(const CompositeProblem& problem, const Stack& x, const Gossiped& g,
                                  const AgentSearch& search, const Vector& alpha, const Stack& t_a,
                                  double delta) {
  double worst = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto& local = search.results[static_cast<std::size_t>(i)];
    const Vector t = t_a.row(i).transpose();
    const double f_t = local.alpha == alpha(i) ? local.value : problem.loss(static_cast<std::size_t>(i)).value(t);
    const double margin = decrease_margin(search.f_x(i), g.grad.row(i).transpose(), x.row(i).transpose(), f_t, t,
                                          alpha(i), delta);
    worst = std::min(worst, margin / (1.0 + std::abs(search.f_x(i))));
  }
  return worst;
}

inline std::vector<int> trials_of(const AgentSearch& search) {
  std::vector<int> out;
  out.reserve(search.results.size());
  for (const auto& r : search.results) out.push_back(r.trials);
  return out;
}

}  // namespace datos::detail
