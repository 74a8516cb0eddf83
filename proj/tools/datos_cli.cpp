// Command-line driver: run, sweep, oracle, selftest.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "datos/harness/experiment.hpp"
#include "datos/harness/output.hpp"
#include "datos/harness/sweep.hpp"
#include "datos/selftest.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct Overrides {
  std::string config;
  std::optional<std::string> solver;
  std::optional<std::string> graph_p;
  std::optional<std::string> seed;
  std::optional<std::string> iters;
  std::optional<std::string> out;
  std::optional<std::string> data_file;
  std::optional<std::string> stride;

  datos::ConfigDocument document() const {
    datos::ConfigDocument doc = datos::load_config_document(config);
    if (solver) doc.set("solver.name", *solver);
    if (graph_p) doc.set("graph.p", *graph_p);
    if (seed) doc.set("run.seed", *seed);
    if (iters) doc.set("run.iters", *iters);
    if (out) doc.set("run.out", *out);
    if (data_file) doc.set("problem.data_file", *data_file);
    if (stride) doc.set("run.stride", *stride);
    return doc;
  }
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "configuration file")->required();
  cmd->add_option("--seed", o.seed, "run seed");
  cmd->add_option("--data-file", o.data_file, "LIBSVM data for logistic_l1");
  cmd->add_option("--out", o.out, "output directory");
}

void add_run_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--solver", o.solver, "global_datos | local_datos | pg_extra | reference");
  cmd->add_option("--graph-p", o.graph_p, "Erdos-Renyi edge probability");
  cmd->add_option("--iters", o.iters, "iterations K");
  cmd->add_option("--stride", o.stride, "emit a row every N iterations");
}

int do_run(const Overrides& o) {
  const datos::ExperimentConfig cfg = datos::experiment_config_from(o.document());
  const datos::ExperimentResult result = datos::run_experiment(cfg);
  datos::write_experiment(cfg.out, cfg, result);
  if (!result.note.empty()) std::cerr << "warning: " << result.note << '\n';
  if (result.status != datos::RunStatus::kOk) {
    std::cerr << "error: " << datos::status_name(result.status) << ": " << result.message << '\n';
    return kExitNumerical;
  }
  std::cout << "wrote " << result.rows.size() << " rows to " << (std::filesystem::path(cfg.out) / "metrics.csv").string()
            << '\n';
  return kExitOk;
}

int do_sweep(const Overrides& o, std::size_t jobs) {
  const datos::SweepConfig sweep = datos::sweep_config_from(o.document());
  const auto cells = datos::run_sweep(sweep, sweep.base.out, jobs);
  int code = kExitOk;
  for (const auto& cell : cells) {
    std::cout << datos::solver_name(cell.solver) << " p=" << cell.p << ' '
              << datos::outcome_name(cell.outcome) << " final_gap=" << datos::format_double(cell.final_gap) << '\n';
    if (cell.outcome == datos::CellOutcome::kConfigError) {
      std::cerr << "error: " << cell.dir << ": " << cell.message << '\n';
      code = kExitConfig;
    } else if (cell.outcome != datos::CellOutcome::kOk && code == kExitOk) {
      std::cerr << "error: " << cell.dir << ": " << cell.message << '\n';
      code = kExitNumerical;
    }
  }
  return code;
}

int do_oracle(const Overrides& o) {
  const datos::ExperimentConfig cfg = datos::experiment_config_from(o.document());
  const datos::Graph graph = datos::build_graph(cfg);
  const datos::BuiltProblem built = datos::build_problem(cfg, graph.agents());
  const datos::OracleResult oracle = datos::solve_oracle(built, cfg.oracle);
  nlohmann::json j;
  j["u_star"] = datos::json_number(oracle.u);
  j["iterations"] = oracle.iterations;
  j["converged"] = oracle.converged;
  j["residual"] = datos::json_number(oracle.residual);
  j["kkt_residual"] = datos::json_number(datos::kkt_residual(built.problem, oracle.x));
  j["x_star"] = std::vector<double>(oracle.x.data(), oracle.x.data() + oracle.x.size());
  const std::string text = j.dump(2) + "\n";
  if (o.out) datos::write_file_atomic(std::filesystem::path(*o.out) / "oracle.json", text);
  std::cout << text;
  return kExitOk;
}

int do_selftest(const std::string& fault) {
  datos::MetricFault mode = datos::MetricFault::kNone;
  if (fault == "metric-root") {
    mode = datos::MetricFault::kSkipSquareRoot;
  } else if (!fault.empty()) {
    std::cerr << "error: unknown fault '" << fault << "' (valid: metric-root)\n";
    return kExitConfig;
  }
  bool all = true;
  for (const auto& check : datos::run_selftest(mode)) {
    std::cout << (check.passed ? "PASS " : "FAIL ") << check.name << " (" << check.detail << ")\n";
    all = all && check.passed;
  }
  return all ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized adaptive three-operator splitting experiments"};
  app.require_subcommand(1);

  Overrides run_o;
  auto* run = app.add_subcommand("run", "run one experiment, write metrics.csv and summary.json");
  add_common(run, run_o);
  add_run_flags(run, run_o);

  Overrides sweep_o;
  std::size_t jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "run the solver x p grid of a config");
  add_common(sweep, sweep_o);
  add_run_flags(sweep, sweep_o);
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  Overrides oracle_o;
  auto* oracle = app.add_subcommand("oracle", "solve the centralized problem of a config");
  add_common(oracle, oracle_o);

  std::string fault;
  auto* selftest = app.add_subcommand("selftest", "fast invariant suite");
  selftest->add_option("--inject-fault", fault, "deliberately break a component (metric-root)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return do_run(run_o);
    if (*sweep) return do_sweep(sweep_o, jobs);
    if (*oracle) return do_oracle(oracle_o);
    if (*selftest) return do_selftest(fault);
  } catch (const datos::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kExitConfig;
  } catch (const datos::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const datos::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const datos::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
