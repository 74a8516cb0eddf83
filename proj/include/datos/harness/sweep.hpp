#pragma once

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "datos/harness/experiment.hpp"
#include "datos/harness/output.hpp"

namespace datos {

enum class CellOutcome { kOk, kDiverged, kNumericalFailure, kConfigError };

struct SweepCell {
  SolverKind solver = SolverKind::kGlobalDatos;
  double p = 0.0;
  std::string dir;  // relative to the sweep output directory
  CellOutcome outcome = CellOutcome::kOk;
  std::string message;
  std::size_t iterations = 0;
  double final_gap = std::numeric_limits<double>::quiet_NaN();
  double final_dist_sq = std::numeric_limits<double>::quiet_NaN();
};

inline const char* outcome_name(CellOutcome o) {
  switch (o) {
    case CellOutcome::kOk: return "ok";
    case CellOutcome::kDiverged: return "diverged";
    case CellOutcome::kNumericalFailure: return "numerical_failure";
    case CellOutcome::kConfigError: return "config_error";
  }
  return "?";
}

inline std::string cell_dir_name(SolverKind solver, double p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_p%g", solver_name(solver), p);
  return buf;
}

inline std::string sweep_summary_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  out << "solver,p,status,iterations,final_gap,final_dist_sq,dir\n";
  for (const auto& c : cells) {
    out << solver_name(c.solver) << ',' << format_double(c.p) << ',' << outcome_name(c.outcome) << ','
        << c.iterations << ',' << format_double(c.final_gap) << ',' << format_double(c.final_dist_sq) << ','
        << c.dir << '\n';
  }
  return out.str();
}

/// Runs solver x p cells on up to `jobs` threads. Each cell writes its own
/// directory under `out`; the summary lists cells in (solver, p) order, so it
/// does not depend on scheduling.
inline std::vector<SweepCell> run_sweep(const SweepConfig& sweep, const std::filesystem::path& out, std::size_t jobs) {
  if (sweep.solvers.empty() || sweep.ps.empty()) {
    throw ConfigError("sweep: solver and p lists must be nonempty");
  }
  std::vector<ExperimentConfig> configs;
  std::vector<SweepCell> cells;
  for (SolverKind solver : sweep.solvers) {
    for (double p : sweep.ps) {
      ExperimentConfig cfg = sweep.base;
      cfg.solver.kind = solver;
      cfg.graph.p = p;
      SweepCell cell;
      cell.solver = solver;
      cell.p = p;
      cell.dir = cell_dir_name(solver, p);
      cfg.out = (out / cell.dir).string();
      configs.push_back(std::move(cfg));
      cells.push_back(std::move(cell));
    }
  }

  // The instance does not depend on the cell, so one oracle serves all.
  const ExperimentConfig& first = configs.front();
  const BuiltProblem built = build_problem(first, build_graph(first).agents());
  const OracleResult oracle = solve_oracle(built, first.oracle);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      SweepCell& cell = cells[i];
      try {
        const ExperimentResult result = run_experiment(configs[i], &oracle);
        write_experiment(configs[i].out, configs[i], result);
        cell.iterations = result.iterations;
        cell.message = result.message;
        if (!result.rows.empty()) {
          cell.final_gap = result.rows.back().gap;
          cell.final_dist_sq = result.rows.back().dist_sq;
        }
        cell.outcome = result.status == RunStatus::kOk         ? CellOutcome::kOk
                       : result.status == RunStatus::kDiverged ? CellOutcome::kDiverged
                                                               : CellOutcome::kNumericalFailure;
      } catch (const ConfigError& e) {
        cell.outcome = CellOutcome::kConfigError;
        cell.message = e.what();
      } catch (const std::exception& e) {
        cell.outcome = CellOutcome::kNumericalFailure;
        cell.message = e.what();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, cells.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  write_file_atomic(out / "sweep_summary.csv", sweep_summary_csv(cells));
  return cells;
}

}  // namespace datos
