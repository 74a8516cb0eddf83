#pragma once

#include <cstdint>
#include <vector>

#include "datos/linalg.hpp"

namespace datos {

/// Communication performed by one synchronous iteration.
struct CommCounts {
  std::uint64_t vector_rounds = 0;      // every agent exchanged one d-vector with its neighbors
  std::uint64_t scalar_rounds = 0;      // every agent exchanged one scalar with its neighbors
  std::uint64_t global_broadcasts = 0;  // one network-wide scalar min

  CommCounts& operator+=(const CommCounts& other) {
    vector_rounds += other.vector_rounds;
    scalar_rounds += other.scalar_rounds;
    global_broadcasts += other.global_broadcasts;
    return *this;
  }
  friend bool operator==(const CommCounts&, const CommCounts&) = default;
};

struct StepMetrics {
  Vector alpha;                        // stepsize each agent used in its update
  std::vector<int> linesearch_trials;  // per agent; empty for fixed-step methods
  CommCounts comm;
  /// min_i of (rhs - lhs) / (1 + |f_i(x_i)|) of the sufficient-decrease test,
  /// evaluated at the stepsize actually used. +inf when not applicable.
  double min_decrease_margin = 0.0;
  /// Rows x_half_i - alpha_i d_half_i (the T_A iterate), used by ergodic averages.
  Stack t_a;
};

}  // namespace datos
