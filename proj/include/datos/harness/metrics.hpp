#pragma once

#include <cstddef>
#include <cstdint>

#include "datos/errors.hpp"
#include "datos/linalg.hpp"
#include "datos/solvers/state.hpp"

namespace datos {

/// ||X - 1 xbar^T||_F with xbar the column mean.
inline double consensus_error(const Stack& x) {
  if (x.rows() == 0) return 0.0;
  const Eigen::RowVectorXd mean = x.colwise().mean();
  return (x.rowwise() - mean).norm();
}

/// Stepsize-weighted running averages of T_A and S with theta = sum of weights.
struct ErgodicTracker {
  double theta = 0.0;
  Stack t_bar;
  Stack s_bar;
  std::size_t count = 0;
};

inline void update_ergodic(ErgodicTracker& tracker, double alpha_prev, const Stack& t_a, const Stack& s) {
  if (!(alpha_prev > 0.0)) {
    throw ConfigError("update_ergodic: alpha_prev must be positive");
  }
  tracker.theta += alpha_prev;
  ++tracker.count;
  if (tracker.count == 1) {
    tracker.t_bar = t_a;
    tracker.s_bar = s;
    return;
  }
  const double w = alpha_prev / tracker.theta;
  tracker.t_bar += w * (t_a - tracker.t_bar);
  tracker.s_bar += w * (s - tracker.s_bar);
}

/// Cumulative communication counters.
using CommLedger = CommCounts;

struct MetricsRow {
  std::size_t k = 0;
  double gap = 0.0;
  double consensus_err = 0.0;
  double dist_sq = 0.0;
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  std::uint64_t vec_rounds = 0;
  std::uint64_t scal_rounds = 0;
  std::uint64_t bcasts = 0;
  std::uint64_t ls_trials = 0;
};

}  // namespace datos
