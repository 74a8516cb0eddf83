#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "datos/harness/scenario.hpp"
#include "datos/linesearch.hpp"
#include "datos/solvers/global_datos.hpp"
#include "datos/solvers/local_datos.hpp"
#include "datos/solvers/reference.hpp"

namespace datos {

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace selftest {

inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct ScaledQuadratic {
  double l;
  double value(const Vector& x) const { return 0.5 * l * x.squaredNorm(); }
  Vector gradient(const Vector& x) const { return l * x; }
};

inline SelftestCheck linesearch_bounds() {
  SelftestCheck check{"linesearch bounds", true, {}};
  const double delta = 0.9;
  const double alpha_in = 10.0;
  for (double l : {0.1, 1.0, 10.0}) {
    const ScaledQuadratic f{l};
    const Vector x1 = Vector::Ones(3);
    const Vector direction = -l * x1;
    const auto res = linesearch(alpha_in, f, x1, x1, direction, delta);
    const double lower = std::min(alpha_in, delta / (2.0 * l));
    if (!(res.alpha >= lower && res.alpha <= alpha_in)) {
      check.passed = false;
      check.detail += "L=" + short_number(l) + " alpha=" + short_number(res.alpha) + "; ";
    }
  }
  const ScaledQuadratic unit{1.0};
  const Vector one = Vector::Ones(1);
  const auto hand = linesearch(alpha_in, unit, one, one, -one, delta);
  if (hand.alpha != 0.625 || hand.trials != 5) {
    check.passed = false;
    check.detail += "hand case alpha=" + short_number(hand.alpha);
  }
  return check;
}

inline double relative(const Stack& a, const Stack& b) { return (a - b).norm() / (1.0 + b.norm()); }

/// 1^T D stays zero along a global run.
inline SelftestCheck tracking_range(const Scenario& sc, std::size_t iters) {
  SelftestCheck check{"tracking variable range", true, {}};
  GlobalState st = global_initial_state(sc.x0, sc.s0, sc.cfg.solver.alpha_init);
  double worst = 0.0;
  for (std::size_t k = 0; k < iters; ++k) {
    st = global_datos_step(st, sc.problem(), sc.mixing, sc.cfg.solver.delta).state;
    const double scale = 1.0 + st.d.cwiseAbs().maxCoeff();
    worst = std::max(worst, column_sums(st.d).cwiseAbs().maxCoeff() / scale);
  }
  check.passed = worst <= 1e-9;
  check.detail = "max |1^T D| / scale = " + short_number(worst);
  return check;
}

inline SelftestCheck reference_equivalence(const Scenario& sc, std::size_t iters, MetricFault fault) {
  SelftestCheck check{"reference equivalence", true, {}};
  const ReferenceOperators ops = make_reference_operators(sc.mixing, fault);
  GlobalState st = global_initial_state(sc.x0, sc.s0, sc.cfg.solver.alpha_init);
  ReferenceState ref = reference_from_global(st, ops);
  double worst = 0.0;
  for (std::size_t k = 0; k < iters; ++k) {
    st = global_datos_step(st, sc.problem(), sc.mixing, sc.cfg.solver.delta).state;
    ref = davis_yin_reference_step(ref, sc.problem(), ops, sc.cfg.solver.delta).state;
    worst = std::max({worst, relative(ref.t_b1, st.x), relative(ref.s1, st.s)});
  }
  check.passed = worst <= 1e-8;
  check.detail = "max relative deviation = " + short_number(worst);
  return check;
}

inline SelftestCheck complete_graph_collapse(const Scenario& sc, std::size_t iters) {
  SelftestCheck check{"complete-graph collapse", true, {}};
  GlobalState g = global_initial_state(sc.x0, sc.s0, sc.cfg.solver.alpha_init);
  LocalState l = local_initial_state(sc.x0, sc.s0, sc.cfg.solver.alpha_init);
  double worst = 0.0;
  for (std::size_t k = 0; k < iters; ++k) {
    g = global_datos_step(g, sc.problem(), sc.mixing, sc.cfg.solver.delta).state;
    l = local_datos_step(l, sc.problem(), sc.mixing, sc.graph, sc.cfg.solver.delta).state;
    worst = std::max({worst, relative(l.x, g.x), relative(l.s, g.s), relative(l.d, g.d)});
  }
  check.passed = worst <= 1e-12;
  check.detail = "max relative deviation = " + short_number(worst);
  return check;
}

}  // namespace selftest

/// Fast invariant suite on the m = 5 lasso instance.
inline std::vector<SelftestCheck> run_selftest(MetricFault fault = MetricFault::kNone) {
  std::vector<SelftestCheck> out;
  out.push_back(selftest::linesearch_bounds());
  const Scenario lasso = make_scenario(lasso_preset());
  out.push_back(selftest::tracking_range(lasso, 200));
  out.push_back(selftest::reference_equivalence(lasso, 100, fault));
  const Scenario complete = make_scenario(lasso_preset(5, 1.0));
  out.push_back(selftest::complete_graph_collapse(complete, 200));
  return out;
}

}  // namespace datos
