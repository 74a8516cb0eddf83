#pragma once

#include <cstdint>

#include "datos/harness/experiment.hpp"

namespace datos {

/// Everything a solver needs, built from a config.
struct Scenario {
  ExperimentConfig cfg;
  Graph graph;
  MixingMatrix mixing;
  BuiltProblem built;
  Stack x0;
  Stack s0;

  const CompositeProblem& problem() const { return built.problem; }
};

inline Scenario make_scenario(const ExperimentConfig& cfg) {
  validate(cfg);
  Graph graph = build_graph(cfg);
  MixingMatrix mixing = mixing_matrix(metropolis_weights(graph), cfg.graph.c);
  BuiltProblem built = build_problem(cfg, graph.agents());
  auto [x0, s0] = initial_iterates(built, graph.agents(), cfg.init_seed());
  return Scenario{cfg, std::move(graph), std::move(mixing), std::move(built), std::move(x0), std::move(s0)};
}

// Desk-scale presets.

inline ExperimentConfig lasso_preset(std::size_t agents = 5, double p = 0.6, std::uint64_t seed = 1) {
  ExperimentConfig cfg;
  cfg.problem.kind = ProblemKind::kLasso;
  cfg.problem.samples = 10;
  cfg.problem.dim = 10;
  cfg.problem.lambda = 0.1;
  cfg.graph.agents = agents;
  cfg.graph.p = p;
  cfg.seed = seed;
  return cfg;
}

inline ExperimentConfig logistic_preset(double p = 0.5, std::uint64_t seed = 1) {
  ExperimentConfig cfg;
  cfg.problem.kind = ProblemKind::kLogisticL1;
  cfg.problem.samples = 20;
  cfg.problem.dim = 30;
  cfg.problem.lambda = 1e-3;
  cfg.graph.agents = 10;
  cfg.graph.p = p;
  cfg.seed = seed;
  return cfg;
}

inline ExperimentConfig covariance_preset(double p = 0.6, std::uint64_t seed = 1) {
  ExperimentConfig cfg;
  cfg.problem.kind = ProblemKind::kCovariance;
  cfg.problem.samples = 50;
  cfg.problem.dim = 3;
  cfg.problem.lower = 0.5;
  cfg.problem.upper = 5.0;
  cfg.graph.agents = 5;
  cfg.graph.p = p;
  cfg.seed = seed;
  return cfg;
}

inline ExperimentConfig elastic_net_preset(double p = 0.5, std::uint64_t seed = 1) {
  ExperimentConfig cfg;
  cfg.problem.kind = ProblemKind::kElasticNet;
  cfg.problem.samples = 10;
  cfg.problem.dim = 50;
  cfg.problem.lambda = 1e-3;
  cfg.problem.gamma_base = 0.1;
  cfg.problem.gamma_step = 0.1;
  cfg.graph.agents = 10;
  cfg.graph.p = p;
  cfg.seed = seed;
  return cfg;
}

}  // namespace datos
