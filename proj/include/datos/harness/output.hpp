#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "datos/errors.hpp"
#include "datos/harness/experiment.hpp"

namespace datos {

inline constexpr const char* kCsvHeader =
    "k,gap,consensus_err,dist_sq,alpha_min,alpha_max,vec_rounds,scal_rounds,bcasts,ls_trials";

/// 17 significant digits, '.' decimal separator; nan/inf spelled out.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.k << ',' << format_double(r.gap) << ',' << format_double(r.consensus_err) << ','
        << format_double(r.dist_sq) << ',' << format_double(r.alpha_min) << ',' << format_double(r.alpha_max) << ','
        << r.vec_rounds << ',' << r.scal_rounds << ',' << r.bcasts << ',' << r.ls_trials << '\n';
  }
  return out.str();
}

/// Writes via a sibling temp file and rename, so readers never see a
/// truncated file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw ConfigError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

/// JSON numbers cannot carry nan/inf; those become strings.
inline nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline nlohmann::json config_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  const auto& pr = cfg.problem;
  j["problem"] = {{"kind", problem_name(pr.kind)},
                  {"samples", pr.samples},
                  {"dim", pr.dim},
                  {"lambda", pr.lambda},
                  {"gamma_base", pr.gamma_base},
                  {"gamma_step", pr.gamma_step},
                  {"lower", pr.lower},
                  {"upper", pr.upper},
                  {"rho", pr.rho},
                  {"trace_sign", pr.trace_sign == TraceSign::kAsPrinted ? "as_printed" : "conventional"},
                  {"density", pr.density},
                  {"flip", pr.flip},
                  {"data_file", pr.data_file},
                  {"seed", cfg.problem_seed()}};
  if (pr.positive_label) j["problem"]["positive_label"] = *pr.positive_label;
  j["graph"] = {{"agents", cfg.graph.agents}, {"p", cfg.graph.p}, {"seed", cfg.graph_seed()},
                {"file", cfg.graph.file},     {"c", cfg.graph.c}};
  j["solver"] = {{"name", solver_name(cfg.solver.kind)},
                 {"delta", cfg.solver.delta},
                 {"alpha_init", cfg.solver.alpha_init},
                 {"dual_update", cfg.solver.local.dual_update == DualUpdate::kConsistent ? "consistent" : "as_printed"},
                 {"neighborhood", cfg.solver.local.neighborhood == Neighborhood::kClosed ? "closed" : "open"}};
  if (cfg.solver.pg_extra_alpha) j["solver"]["pg_extra_alpha"] = *cfg.solver.pg_extra_alpha;
  j["run"] = {{"iters", cfg.iters}, {"stride", cfg.stride}, {"seed", cfg.seed}, {"out", cfg.out}};
  j["oracle"] = {{"tol", cfg.oracle.tol},
                 {"max_iter", cfg.oracle.max_iter},
                 {"stagnation_window", cfg.oracle.stagnation_window}};
  return j;
}

inline nlohmann::json summary_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
  nlohmann::json j;
  j["config"] = config_json(cfg);
  j["status"] = status_name(result.status);
  if (!result.message.empty()) j["message"] = result.message;
  if (!result.note.empty()) j["note"] = result.note;
  j["u_star"] = json_number(result.oracle.u);
  j["oracle"] = {{"iterations", result.oracle.iterations},
                 {"converged", result.oracle.converged},
                 {"residual", json_number(result.oracle.residual)}};
  j["agents"] = result.agents;
  j["edges"] = result.edges;
  j["iterations"] = result.iterations;
  j["rows"] = result.rows.size();
  if (cfg.solver.kind == SolverKind::kPgExtra) j["pg_extra_alpha"] = result.pg_extra_alpha;
  j["gap_out_of_domain"] = result.gap_out_of_domain;
  j["ergodic"] = {{"theta", result.ergodic.theta},
                  {"gap", json_number(result.ergodic_gap)},
                  {"out_of_domain", result.ergodic_out_of_domain}};
  if (!result.rows.empty()) {
    const auto& last = result.rows.back();
    j["final"] = {{"k", last.k},
                  {"gap", json_number(last.gap)},
                  {"consensus_err", json_number(last.consensus_err)},
                  {"dist_sq", json_number(last.dist_sq)},
                  {"alpha_min", json_number(last.alpha_min)},
                  {"alpha_max", json_number(last.alpha_max)},
                  {"vec_rounds", last.vec_rounds},
                  {"scal_rounds", last.scal_rounds},
                  {"bcasts", last.bcasts},
                  {"ls_trials", last.ls_trials}};
  }
  return j;
}

/// metrics.csv and summary.json under `dir`.
inline void write_experiment(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                             const ExperimentResult& result) {
  write_file_atomic(dir / "metrics.csv", metrics_csv(result.rows));
  write_file_atomic(dir / "summary.json", summary_json(cfg, result).dump(2) + "\n");
}

}  // namespace datos
