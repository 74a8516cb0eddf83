#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "datos/harness/config.hpp"
#include "datos/harness/metrics.hpp"
#include "datos/harness/session.hpp"
#include "datos/instances.hpp"
#include "datos/libsvm.hpp"
#include "datos/netgraph.hpp"
#include "datos/solvers/centralized.hpp"

namespace datos {

enum class ProblemKind { kLogisticL1, kCovariance, kElasticNet, kLasso };

inline const char* problem_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kLogisticL1: return "logistic_l1";
    case ProblemKind::kCovariance: return "covariance";
    case ProblemKind::kElasticNet: return "elastic_net";
    case ProblemKind::kLasso: return "lasso";
  }
  return "?";
}

inline ProblemKind parse_problem(const std::string& name) {
  for (auto kind : {ProblemKind::kLogisticL1, ProblemKind::kCovariance, ProblemKind::kElasticNet, ProblemKind::kLasso}) {
    if (name == problem_name(kind)) return kind;
  }
  throw ConfigError("unknown problem kind '" + name + "' (valid: logistic_l1, covariance, elastic_net, lasso)");
}

struct ProblemSettings {
  ProblemKind kind = ProblemKind::kLasso;
  std::size_t samples = 10;  // per agent
  std::size_t dim = 10;      // covariance: side length of X
  double lambda = 0.1;
  double gamma_base = 0.1;  // elastic_net only
  double gamma_step = 0.1;
  double lower = 0.5;  // covariance box
  double upper = 5.0;
  double rho = 0.5;  // AR(1) correlation of the generating covariance
  TraceSign trace_sign = TraceSign::kAsPrinted;
  double density = 0.3;  // synthetic logistic features
  double flip = 0.1;
  std::string data_file;
  std::optional<double> positive_label;
  std::optional<std::uint64_t> seed;
};

struct GraphSettings {
  std::size_t agents = 5;
  double p = 0.6;
  std::optional<std::uint64_t> seed;
  std::string file;
  double c = 1.0 / 3.0;
};

struct SolverSettings {
  SolverKind kind = SolverKind::kGlobalDatos;
  double delta = 0.9;
  double alpha_init = 10.0;
  std::optional<double> pg_extra_alpha;  // default 1 / max_i L_i
  LocalOptions local;
};

struct ExperimentConfig {
  ProblemSettings problem;
  GraphSettings graph;
  SolverSettings solver;
  std::size_t iters = 1000;
  std::size_t stride = 1;
  std::uint64_t seed = 1;
  std::string out = "out";
  OracleOptions oracle;

  std::uint64_t graph_seed() const { return graph.seed.value_or(seed); }
  std::uint64_t problem_seed() const { return problem.seed.value_or(seed + 1); }
  std::uint64_t init_seed() const { return seed + 2; }
};

/// A config whose solver and graph probability may be lists.
struct SweepConfig {
  ExperimentConfig base;
  std::vector<SolverKind> solvers;
  std::vector<double> ps;
};

namespace detail {

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "problem.kind",       "problem.samples",     "problem.dim",          "problem.lambda",
      "problem.gamma_base", "problem.gamma_step",  "problem.lower",        "problem.upper",
      "problem.rho",        "problem.trace_sign",  "problem.density",      "problem.flip",
      "problem.data_file",  "problem.positive_label", "problem.seed",      "graph.agents",
      "graph.p",            "graph.seed",          "graph.file",           "graph.c",
      "solver.name",        "solver.delta",        "solver.alpha_init",    "solver.pg_extra_alpha",
      "solver.dual_update", "solver.neighborhood", "run.iters",            "run.stride",
      "run.seed",           "run.out",             "oracle.tol",           "oracle.max_iter",
      "oracle.stagnation_window"};
  return keys;
}

class ConfigReader {
 public:
  explicit ConfigReader(const ConfigDocument& doc) : doc_(doc) {}

  template <class Fn>
  void with(const std::string& key, Fn&& fn) const {
    const ConfigEntry* entry = doc_.find(key);
    if (entry == nullptr) return;
    try {
      fn(entry->value);
    } catch (const ConfigError& e) {
      throw ConfigError(ConfigDocument::where(*entry) + e.what());
    }
  }

  void real(const std::string& key, double& out) const {
    with(key, [&](const std::string& v) { out = config_value::to_double(key, v); });
  }
  void real(const std::string& key, std::optional<double>& out) const {
    with(key, [&](const std::string& v) { out = config_value::to_double(key, v); });
  }
  void count(const std::string& key, std::size_t& out) const {
    with(key, [&](const std::string& v) { out = static_cast<std::size_t>(config_value::to_unsigned(key, v)); });
  }
  void seed(const std::string& key, std::uint64_t& out) const {
    with(key, [&](const std::string& v) { out = config_value::to_unsigned(key, v); });
  }
  void seed(const std::string& key, std::optional<std::uint64_t>& out) const {
    with(key, [&](const std::string& v) { out = config_value::to_unsigned(key, v); });
  }
  void text(const std::string& key, std::string& out) const {
    with(key, [&](const std::string& v) { out = v; });
  }

 private:
  const ConfigDocument& doc_;
};

inline void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace detail

inline void validate(const ExperimentConfig& cfg) {
  using detail::require;
  const auto& pr = cfg.problem;
  require(pr.samples > 0, "problem.samples must be positive");
  require(pr.dim > 0, "problem.dim must be positive");
  require(pr.lambda >= 0.0 && std::isfinite(pr.lambda), "problem.lambda must be nonnegative");
  require(pr.gamma_base >= 0.0 && pr.gamma_step >= 0.0, "problem.gamma_base and gamma_step must be nonnegative");
  require(pr.lower > 0.0 && pr.lower < pr.upper && std::isfinite(pr.upper),
          "problem.lower and upper must satisfy 0 < lower < upper");
  require(pr.rho > -1.0 && pr.rho < 1.0, "problem.rho must lie in (-1, 1)");
  require(pr.density > 0.0 && pr.density <= 1.0, "problem.density must lie in (0, 1]");
  require(pr.flip >= 0.0 && pr.flip <= 0.5, "problem.flip must lie in [0, 0.5]");
  require(!(pr.kind != ProblemKind::kLogisticL1 && !pr.data_file.empty()),
          "problem.data_file is only used by logistic_l1");
  require(cfg.graph.file.empty() ? cfg.graph.agents >= 2 : true, "graph.agents must be at least 2");
  require(cfg.graph.p > 0.0 && cfg.graph.p <= 1.0, "graph.p must lie in (0, 1]");
  require(cfg.graph.c > 0.0 && cfg.graph.c < 0.5, "graph.c must lie in (0, 1/2)");
  require(cfg.solver.delta > 0.0 && cfg.solver.delta < 1.0, "solver.delta must lie in (0, 1)");
  require(cfg.solver.alpha_init > 0.0 && std::isfinite(cfg.solver.alpha_init), "solver.alpha_init must be positive");
  require(!cfg.solver.pg_extra_alpha || *cfg.solver.pg_extra_alpha > 0.0, "solver.pg_extra_alpha must be positive");
  require(cfg.stride > 0, "run.stride must be positive");
  require(cfg.oracle.tol > 0.0, "oracle.tol must be positive");
  require(cfg.oracle.max_iter > 0, "oracle.max_iter must be positive");
  require(!cfg.out.empty(), "run.out must not be empty");
}

/// Reads a configuration in which solver.name and graph.p may be lists.
inline SweepConfig sweep_config_from(const ConfigDocument& doc) {
  doc.reject_unknown(detail::known_config_keys());
  const detail::ConfigReader read(doc);
  SweepConfig sweep;
  ExperimentConfig& cfg = sweep.base;
  auto& pr = cfg.problem;

  read.with("problem.kind", [&](const std::string& v) { pr.kind = parse_problem(v); });
  read.count("problem.samples", pr.samples);
  read.count("problem.dim", pr.dim);
  read.real("problem.lambda", pr.lambda);
  read.real("problem.gamma_base", pr.gamma_base);
  read.real("problem.gamma_step", pr.gamma_step);
  read.real("problem.lower", pr.lower);
  read.real("problem.upper", pr.upper);
  read.real("problem.rho", pr.rho);
  read.with("problem.trace_sign", [&](const std::string& v) {
    if (v == "as_printed") {
      pr.trace_sign = TraceSign::kAsPrinted;
    } else if (v == "conventional") {
      pr.trace_sign = TraceSign::kConventional;
    } else {
      throw ConfigError("problem.trace_sign must be as_printed or conventional");
    }
  });
  read.real("problem.density", pr.density);
  read.real("problem.flip", pr.flip);
  read.text("problem.data_file", pr.data_file);
  read.real("problem.positive_label", pr.positive_label);
  read.seed("problem.seed", pr.seed);

  read.count("graph.agents", cfg.graph.agents);
  read.seed("graph.seed", cfg.graph.seed);
  read.text("graph.file", cfg.graph.file);
  read.real("graph.c", cfg.graph.c);
  read.with("graph.p", [&](const std::string& v) {
    for (const auto& item : config_value::split_list(v)) {
      sweep.ps.push_back(config_value::to_double("graph.p", item));
    }
    if (sweep.ps.empty()) throw ConfigError("graph.p: empty list");
  });

  read.with("solver.name", [&](const std::string& v) {
    for (const auto& item : config_value::split_list(v)) sweep.solvers.push_back(parse_solver(item));
    if (sweep.solvers.empty()) throw ConfigError("solver.name: empty list");
  });
  read.real("solver.delta", cfg.solver.delta);
  read.real("solver.alpha_init", cfg.solver.alpha_init);
  read.real("solver.pg_extra_alpha", cfg.solver.pg_extra_alpha);
  read.with("solver.dual_update", [&](const std::string& v) {
    if (v == "consistent") {
      cfg.solver.local.dual_update = DualUpdate::kConsistent;
    } else if (v == "as_printed") {
      cfg.solver.local.dual_update = DualUpdate::kAsPrinted;
    } else {
      throw ConfigError("solver.dual_update must be consistent or as_printed");
    }
  });
  read.with("solver.neighborhood", [&](const std::string& v) {
    if (v == "closed") {
      cfg.solver.local.neighborhood = Neighborhood::kClosed;
    } else if (v == "open") {
      cfg.solver.local.neighborhood = Neighborhood::kOpen;
    } else {
      throw ConfigError("solver.neighborhood must be closed or open");
    }
  });

  read.count("run.iters", cfg.iters);
  read.count("run.stride", cfg.stride);
  read.seed("run.seed", cfg.seed);
  read.text("run.out", cfg.out);
  read.real("oracle.tol", cfg.oracle.tol);
  read.count("oracle.max_iter", cfg.oracle.max_iter);
  read.count("oracle.stagnation_window", cfg.oracle.stagnation_window);

  if (sweep.ps.empty()) sweep.ps.push_back(cfg.graph.p);
  if (sweep.solvers.empty()) sweep.solvers.push_back(cfg.solver.kind);
  cfg.graph.p = sweep.ps.front();
  cfg.solver.kind = sweep.solvers.front();
  for (double p : sweep.ps) {
    ExperimentConfig cell = cfg;
    cell.graph.p = p;
    validate(cell);
  }
  return sweep;
}

/// Reads a single-experiment configuration; list values are rejected.
inline ExperimentConfig experiment_config_from(const ConfigDocument& doc) {
  SweepConfig sweep = sweep_config_from(doc);
  if (sweep.solvers.size() != 1 || sweep.ps.size() != 1) {
    throw ConfigError("solver.name and graph.p take a single value outside sweep");
  }
  return sweep.base;
}

inline ConfigDocument load_config_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  try {
    return ConfigDocument::parse(in);
  } catch (const ParseError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline Graph build_graph(const ExperimentConfig& cfg) {
  if (!cfg.graph.file.empty()) {
    std::ifstream in(cfg.graph.file);
    if (!in) throw ConfigError("cannot open graph file '" + cfg.graph.file + "'");
    try {
      return read_edge_list(in);
    } catch (const ParseError& e) {
      throw ConfigError(cfg.graph.file + ": " + e.what());
    }
  }
  return erdos_renyi(cfg.graph.agents, cfg.graph.p, cfg.graph_seed());
}

struct BuiltProblem {
  CompositeProblem problem;
  bool matrix_variable = false;  // rows are flattened symmetric matrices
  std::string note;              // e.g. dropped rows in partitioning
};

inline Dataset load_logistic_data(const ProblemSettings& pr) {
  std::ifstream in(pr.data_file);
  if (!in) throw ConfigError("cannot open data file '" + pr.data_file + "'");
  Dataset data = parse_libsvm(in);
  if (pr.positive_label) {
    for (auto& row : data.rows) row.label = row.label == *pr.positive_label ? 1.0 : -1.0;
  }
  return data;
}

inline BuiltProblem build_problem(const ExperimentConfig& cfg, std::size_t agents) {
  const auto& pr = cfg.problem;
  switch (pr.kind) {
    case ProblemKind::kLasso:
    case ProblemKind::kElasticNet: {
      RegressionSpec spec;
      spec.agents = agents;
      spec.samples = pr.samples;
      spec.dim = pr.dim;
      spec.lambda = pr.lambda;
      spec.gamma_base = pr.kind == ProblemKind::kLasso ? 0.0 : pr.gamma_base;
      spec.gamma_step = pr.kind == ProblemKind::kLasso ? 0.0 : pr.gamma_step;
      spec.seed = cfg.problem_seed();
      return BuiltProblem{gen_regression_instance(spec).problem, false, {}};
    }
    case ProblemKind::kCovariance: {
      CovarianceSpec spec;
      spec.sigma = ar1_covariance(pr.dim, pr.rho);
      spec.samples = pr.samples;
      spec.agents = agents;
      spec.lower = pr.lower;
      spec.upper = pr.upper;
      spec.sign = pr.trace_sign;
      spec.seed = cfg.problem_seed();
      return BuiltProblem{gen_covariance_instance(spec).problem, true, {}};
    }
    case ProblemKind::kLogisticL1: {
      Dataset data;
      if (pr.data_file.empty()) {
        LogisticSpec spec;
        spec.rows = agents * pr.samples;
        spec.dim = pr.dim;
        spec.density = pr.density;
        spec.flip = pr.flip;
        spec.seed = cfg.problem_seed();
        data = gen_logistic_dataset(spec);
      } else {
        data = load_logistic_data(pr);
      }
      Partition part = partition_dataset(data, agents);
      return BuiltProblem{logistic_problem(part.shards, data.dim, pr.lambda), false, part.warning};
    }
  }
  throw ConfigError("build_problem: invalid problem kind");
}

/// Seeded starting point: X0 and S0 with i.i.d. N(0,1) entries. Matrix
/// variables are symmetrized, and X0 rows are projected onto the constraint.
inline std::pair<Stack, Stack> initial_iterates(const BuiltProblem& built, std::size_t agents, std::uint64_t seed) {
  const auto m = static_cast<Eigen::Index>(agents);
  const auto d = static_cast<Eigen::Index>(built.problem.dim());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Stack x(m, d);
  Stack s(m, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = normal(rng);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) s(i, j) = normal(rng);
  }
  if (built.matrix_variable) {
    const std::size_t side = detail::square_side(d, "initial_iterates");
    for (Eigen::Index i = 0; i < m; ++i) {
      const Vector xi = detail::flatten(detail::unflatten_symmetric(x.row(i).transpose(), side));
      x.row(i) = built.problem.regularizer().prox(xi, 1.0).transpose();
      s.row(i) = detail::flatten(detail::unflatten_symmetric(s.row(i).transpose(), side)).transpose();
    }
  }
  return {std::move(x), std::move(s)};
}

/// A feasible starting point for the oracle: prox_r(0).
inline Vector oracle_start(const BuiltProblem& built) {
  return built.problem.regularizer().prox(Vector::Zero(static_cast<Eigen::Index>(built.problem.dim())), 1.0);
}

enum class RunStatus { kOk, kDiverged, kNumericalFailure };

inline const char* status_name(RunStatus s) {
  switch (s) {
    case RunStatus::kOk: return "ok";
    case RunStatus::kDiverged: return "diverged";
    case RunStatus::kNumericalFailure: return "numerical_failure";
  }
  return "?";
}

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  RunStatus status = RunStatus::kOk;
  std::string message;
  OracleResult oracle;
  std::size_t agents = 0;
  std::size_t edges = 0;
  std::size_t iterations = 0;  // completed steps
  double pg_extra_alpha = 0.0;
  std::size_t gap_out_of_domain = 0;  // agent rows excluded from gap means
  ErgodicTracker ergodic;
  double ergodic_gap = std::numeric_limits<double>::quiet_NaN();
  std::size_t ergodic_out_of_domain = 0;
  Stack final_x;
  std::string note;
};

inline constexpr double kDivergenceNorm = 1e12;

namespace detail {

/// Mean of u over the rows that lie in the domain, minus u_star.
inline double mean_gap(const CompositeProblem& problem, const Stack& x, double u_star, std::size_t& excluded) {
  double sum = 0.0;
  std::size_t used = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double u = problem.objective(x.row(i).transpose());
    if (std::isfinite(u)) {
      sum += u;
      ++used;
    } else {
      ++excluded;
    }
  }
  if (used == 0) return std::numeric_limits<double>::quiet_NaN();
  return sum / static_cast<double>(used) - u_star;
}

}  // namespace detail

/// Oracle for the configured instance (u*, x*).
inline OracleResult solve_oracle(const BuiltProblem& built, const OracleOptions& options) {
  OracleResult oracle = centralized_proxgrad(built.problem, oracle_start(built), options);
  if (oracle.max_iter_reached) {
    throw NumericalError("oracle did not converge within " + std::to_string(options.max_iter) + " iterations");
  }
  return oracle;
}

/// Builds the instance, solves the oracle (unless supplied), and runs the
/// configured solver for cfg.iters iterations. A row is emitted after step k
/// when k is a multiple of the stride or k = cfg.iters.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const OracleResult* oracle_hint = nullptr,
                                       MetricFault fault = MetricFault::kNone) {
  validate(cfg);
  const Graph graph = build_graph(cfg);
  const MixingMatrix mixing = mixing_matrix(metropolis_weights(graph), cfg.graph.c);
  const BuiltProblem built = build_problem(cfg, graph.agents());
  const CompositeProblem& problem = built.problem;

  ExperimentResult result;
  result.agents = graph.agents();
  result.edges = graph.edges().size();
  result.note = built.note;
  result.oracle = oracle_hint != nullptr ? *oracle_hint : solve_oracle(built, cfg.oracle);
  const double u_star = result.oracle.u;
  const Vector& x_star = result.oracle.x;

  SessionOptions options;
  options.delta = cfg.solver.delta;
  options.alpha_init = cfg.solver.alpha_init;
  options.local = cfg.solver.local;
  options.fault = fault;
  if (cfg.solver.kind == SolverKind::kPgExtra) {
    if (cfg.solver.pg_extra_alpha) {
      options.pg_extra_alpha = *cfg.solver.pg_extra_alpha;
    } else {
      const auto lip = problem.max_lipschitz();
      if (!lip || !(*lip > 0.0)) {
        throw ConfigError("pg_extra needs solver.pg_extra_alpha for losses without a global Lipschitz constant");
      }
      options.pg_extra_alpha = 1.0 / *lip;
    }
    result.pg_extra_alpha = options.pg_extra_alpha;
  }

  auto [x0, s0] = initial_iterates(built, graph.agents(), cfg.init_seed());
  SolverSession session(cfg.solver.kind, problem, mixing, graph, x0, s0, options);

  CommLedger ledger;
  std::uint64_t trials = 0;
  for (std::size_t k = 1; k <= cfg.iters; ++k) {
    StepMetrics step;
    try {
      step = session.step();
    } catch (const NumericalError& e) {
      result.status = RunStatus::kNumericalFailure;
      result.message = "iteration " + std::to_string(k) + ": " + e.what();
      break;
    }
    if (session.state_norm() > kDivergenceNorm) {
      result.status = RunStatus::kDiverged;
      result.message = "iteration " + std::to_string(k) + ": iterate norm exceeded 1e12";
      break;
    }
    result.iterations = k;
    ledger += step.comm;
    for (int t : step.linesearch_trials) trials += static_cast<std::uint64_t>(t);
    update_ergodic(result.ergodic, step.alpha.minCoeff(), step.t_a, session.s());

    if (k % cfg.stride != 0 && k != cfg.iters) continue;
    const Stack& x = session.x();
    MetricsRow row;
    row.k = k;
    row.gap = detail::mean_gap(problem, x, u_star, result.gap_out_of_domain);
    row.consensus_err = consensus_error(x);
    row.dist_sq = (x.rowwise() - x_star.transpose()).squaredNorm();
    row.alpha_min = step.alpha.minCoeff();
    row.alpha_max = step.alpha.maxCoeff();
    row.vec_rounds = ledger.vector_rounds;
    row.scal_rounds = ledger.scalar_rounds;
    row.bcasts = ledger.global_broadcasts;
    row.ls_trials = trials;
    result.rows.push_back(row);
  }
  result.final_x = session.x();
  if (result.ergodic.count > 0) {
    result.ergodic_gap =
        detail::mean_gap(problem, result.ergodic.t_bar, u_star, result.ergodic_out_of_domain);
  }
  return result;
}

}  // namespace datos
