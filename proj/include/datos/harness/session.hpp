#pragma once

#include <optional>
#include <string>
#include <variant>

#include "datos/netgraph.hpp"
#include "datos/solvers/global_datos.hpp"
#include "datos/solvers/local_datos.hpp"
#include "datos/solvers/pg_extra.hpp"
#include "datos/solvers/reference.hpp"

namespace datos {

enum class SolverKind { kGlobalDatos, kLocalDatos, kPgExtra, kReference };

inline const char* solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::kGlobalDatos: return "global_datos";
    case SolverKind::kLocalDatos: return "local_datos";
    case SolverKind::kPgExtra: return "pg_extra";
    case SolverKind::kReference: return "reference";
  }
  return "?";
}

inline SolverKind parse_solver(const std::string& name) {
  for (auto kind : {SolverKind::kGlobalDatos, SolverKind::kLocalDatos, SolverKind::kPgExtra, SolverKind::kReference}) {
    if (name == solver_name(kind)) return kind;
  }
  throw ConfigError("unknown solver '" + name + "' (valid: global_datos, local_datos, pg_extra, reference)");
}

struct SessionOptions {
  double delta = 0.9;
  double alpha_init = 10.0;
  double pg_extra_alpha = 0.0;
  LocalOptions local;
  MetricFault fault = MetricFault::kNone;
};

/// Steps one solver from (X0, S0) with D0 = 0. Borrows problem, mixing and
/// graph; they must outlive the session.
class SolverSession {
 public:
  SolverSession(SolverKind kind, const CompositeProblem& problem, const MixingMatrix& mixing, const Graph& graph,
                const Stack& x0, const Stack& s0, SessionOptions options)
      : kind_(kind), problem_(problem), mixing_(mixing), graph_(graph), options_(options) {
    switch (kind) {
      case SolverKind::kGlobalDatos:
        state_ = global_initial_state(x0, s0, options.alpha_init);
        break;
      case SolverKind::kLocalDatos:
        state_ = local_initial_state(x0, s0, options.alpha_init);
        break;
      case SolverKind::kPgExtra:
        if (!(options.pg_extra_alpha > 0.0)) {
          throw ConfigError("pg_extra: stepsize must be positive");
        }
        pg_start_ = x0;
        no_dual_ = Stack::Zero(x0.rows(), x0.cols());
        state_ = PgExtraState{};
        break;
      case SolverKind::kReference:
        ops_.emplace(make_reference_operators(mixing, options.fault));
        state_ = reference_from_global(global_initial_state(x0, s0, options.alpha_init), *ops_);
        break;
    }
  }

  SolverKind kind() const noexcept { return kind_; }

  StepMetrics step() {
    switch (kind_) {
      case SolverKind::kGlobalDatos: {
        auto out = global_datos_step(std::get<GlobalState>(state_), problem_, mixing_, options_.delta);
        state_ = std::move(out.state);
        return std::move(out.metrics);
      }
      case SolverKind::kLocalDatos: {
        auto out = local_datos_step(std::get<LocalState>(state_), problem_, mixing_, graph_, options_.delta,
                                    options_.local);
        state_ = std::move(out.state);
        return std::move(out.metrics);
      }
      case SolverKind::kPgExtra: {
        auto out = pg_start_ ? pg_extra_start(*pg_start_, problem_, mixing_, options_.pg_extra_alpha)
                             : pg_extra_step(std::get<PgExtraState>(state_), problem_, mixing_, options_.pg_extra_alpha);
        pg_start_.reset();
        state_ = std::move(out.state);
        return std::move(out.metrics);
      }
      case SolverKind::kReference: {
        auto out = davis_yin_reference_step(std::get<ReferenceState>(state_), problem_, *ops_, options_.delta);
        state_ = std::move(out.state);
        return std::move(out.metrics);
      }
    }
    throw ConfigError("solver session: invalid solver");
  }

  /// Current primal iterate X (one row per agent).
  const Stack& x() const {
    switch (kind_) {
      case SolverKind::kGlobalDatos: return std::get<GlobalState>(state_).x;
      case SolverKind::kLocalDatos: return std::get<LocalState>(state_).x;
      case SolverKind::kPgExtra: return pg_start_ ? *pg_start_ : std::get<PgExtraState>(state_).x;
      case SolverKind::kReference: return std::get<ReferenceState>(state_).t_b1;
    }
    throw ConfigError("solver session: invalid solver");
  }

  /// Current dual iterate S; zero for PG-EXTRA, which has none.
  const Stack& s() const {
    switch (kind_) {
      case SolverKind::kGlobalDatos: return std::get<GlobalState>(state_).s;
      case SolverKind::kLocalDatos: return std::get<LocalState>(state_).s;
      case SolverKind::kPgExtra: return no_dual_;
      case SolverKind::kReference: return std::get<ReferenceState>(state_).s1;
    }
    throw ConfigError("solver session: invalid solver");
  }

  /// Largest Frobenius norm among the method's state blocks; +inf if any
  /// entry is non-finite.
  double state_norm() const {
    double out = 0.0;
    auto take = [&out](const Stack& block) {
      if (block.size() == 0) return;
      if (!block.allFinite()) {
        out = std::numeric_limits<double>::infinity();
        return;
      }
      out = std::max(out, block.norm());
    };
    switch (kind_) {
      case SolverKind::kGlobalDatos: {
        const auto& st = std::get<GlobalState>(state_);
        take(st.x), take(st.s), take(st.d);
        break;
      }
      case SolverKind::kLocalDatos: {
        const auto& st = std::get<LocalState>(state_);
        take(st.x), take(st.s), take(st.d);
        break;
      }
      case SolverKind::kPgExtra: {
        if (pg_start_) {
          take(*pg_start_);
        } else {
          const auto& st = std::get<PgExtraState>(state_);
          take(st.x), take(st.z);
        }
        break;
      }
      case SolverKind::kReference: {
        const auto& st = std::get<ReferenceState>(state_);
        take(st.t_b1), take(st.s1), take(st.s2), take(st.y);
        break;
      }
    }
    return out;
  }

 private:
  SolverKind kind_;
  const CompositeProblem& problem_;
  const MixingMatrix& mixing_;
  const Graph& graph_;
  SessionOptions options_;
  std::variant<GlobalState, LocalState, PgExtraState, ReferenceState> state_;
  std::optional<ReferenceOperators> ops_;
  std::optional<Stack> pg_start_;
  Stack no_dual_;
};

}  // namespace datos
