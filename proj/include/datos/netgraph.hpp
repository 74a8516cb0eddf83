#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "datos/errors.hpp"
#include "datos/linalg.hpp"

namespace datos {

using Edge = std::pair<std::size_t, std::size_t>;

namespace detail {

inline bool connected(std::size_t m, const std::vector<std::vector<std::size_t>>& adjacency) {
  if (m == 0) return false;
  std::vector<bool> seen(m, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t node = frontier.front();
    frontier.pop();
    for (std::size_t next : adjacency[node]) {
      if (!seen[next]) {
        seen[next] = true;
        ++reached;
        frontier.push(next);
      }
    }
  }
  return reached == m;
}

inline std::vector<std::vector<std::size_t>> adjacency_of(std::size_t m, const std::vector<Edge>& edges) {
  std::vector<std::vector<std::size_t>> adjacency(m);
  for (const auto& [i, j] : edges) {
    adjacency[i].push_back(j);
    adjacency[j].push_back(i);
  }
  for (auto& row : adjacency) std::sort(row.begin(), row.end());
  return adjacency;
}

}  // namespace detail

/// Undirected connected communication graph over agents 0..m-1.
///
/// Edges are stored normalized (i < j) and sorted, so two graphs with the
/// same edge set compare equal regardless of how they were enumerated.
class Graph {
 public:
  Graph(std::size_t m, std::vector<Edge> edges) : m_(m) {
    if (m == 0) {
      throw ConfigError("graph: agent count must be positive");
    }
    for (auto& [i, j] : edges) {
      if (i >= m || j >= m) {
        throw ConfigError("graph: edge (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
      }
      if (i == j) {
        throw ConfigError("graph: self-loop at node " + std::to_string(i));
      }
      if (i > j) std::swap(i, j);
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
      throw ConfigError("graph: duplicate edge");
    }
    edges_ = std::move(edges);
    adjacency_ = detail::adjacency_of(m_, edges_);
    if (!detail::connected(m_, adjacency_)) {
      throw ConfigError("graph: not connected");
    }
  }

  std::size_t agents() const noexcept { return m_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_.at(i); }
  std::size_t degree(std::size_t i) const { return adjacency_.at(i).size(); }

  bool has_edge(std::size_t i, std::size_t j) const {
    const auto& row = adjacency_.at(i);
    return std::binary_search(row.begin(), row.end(), j);
  }

  friend bool operator==(const Graph& lhs, const Graph& rhs) {
    return lhs.m_ == rhs.m_ && lhs.edges_ == rhs.edges_;
  }

 private:
  std::size_t m_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

inline Graph complete_graph(std::size_t m) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) edges.emplace_back(i, j);
  }
  return Graph(m, std::move(edges));
}

inline Graph path_graph(std::size_t m) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < m; ++i) edges.emplace_back(i, i + 1);
  return Graph(m, std::move(edges));
}

/// Erdos-Renyi G(m, p), conditioned on connectivity by redrawing with
/// seed+1, seed+2, ... until the draw is connected.
inline Graph erdos_renyi(std::size_t m, double p, std::uint64_t seed) {
  if (m < 2) {
    throw ConfigError("erdos_renyi: need at least 2 agents");
  }
  if (!(p > 0.0 && p <= 1.0)) {
    throw ConfigError("erdos_renyi: edge probability must lie in (0, 1]");
  }
  constexpr std::size_t kMaxRedraws = 1'000'000;
  for (std::size_t attempt = 0; attempt < kMaxRedraws; ++attempt) {
    std::mt19937_64 rng(seed + attempt);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        if (unit(rng) < p) edges.emplace_back(i, j);
      }
    }
    if (detail::connected(m, detail::adjacency_of(m, edges))) {
      return Graph(m, std::move(edges));
    }
  }
  throw ConfigError("erdos_renyi: no connected draw after 10^6 redraws (p too small)");
}

/// Closed neighborhood {i} U N(i), ascending.
inline std::vector<std::size_t> closed_neighborhood(const Graph& g, std::size_t i) {
  if (i >= g.agents()) {
    throw ConfigError("closed_neighborhood: agent index " + std::to_string(i) + " out of range");
  }
  std::vector<std::size_t> out = g.neighbors(i);
  out.insert(std::lower_bound(out.begin(), out.end(), i), i);
  return out;
}

/// Max-degree Metropolis-Hastings weights: 1/(1+max(deg i, deg j)) on edges,
/// diagonal absorbs the remainder.
inline Matrix metropolis_weights(const Graph& g) {
  const std::size_t m = g.agents();
  Matrix w = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (const auto& [i, j] : g.edges()) {
    const double weight = 1.0 / (1.0 + static_cast<double>(std::max(g.degree(i), g.degree(j))));
    w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = weight;
    w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = weight;
  }
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (j != i) off += w(i, j);
    }
    w(i, i) = 1.0 - off;
  }
  return w;
}

/// The lazy gossip matrix W = (1-c) I + c * base.
struct MixingMatrix {
  Matrix w;
  Matrix base;
  double c = 0.0;

  Eigen::Index agents() const noexcept { return w.rows(); }
};

inline MixingMatrix mixing_matrix(const Matrix& base, double c) {
  if (!(c > 0.0 && c < 0.5)) {
    throw ConfigError("mixing_matrix: c must lie in (0, 1/2)");
  }
  if (base.rows() != base.cols() || base.rows() == 0) {
    throw ConfigError("mixing_matrix: base matrix must be square and nonempty");
  }
  constexpr double kTol = 1e-12;
  if ((base - base.transpose()).cwiseAbs().maxCoeff() > kTol) {
    throw ConfigError("mixing_matrix: base matrix is not symmetric");
  }
  if ((base.rowwise().sum().array() - 1.0).abs().maxCoeff() > kTol) {
    throw ConfigError("mixing_matrix: base matrix is not doubly stochastic");
  }
  if ((base.diagonal().array() <= 0.0).any() || (base.array() < 0.0).any()) {
    throw ConfigError("mixing_matrix: base matrix needs a positive diagonal and nonnegative entries");
  }
  const Eigen::Index m = base.rows();
  MixingMatrix out;
  out.base = base;
  out.c = c;
  out.w = (1.0 - c) * Matrix::Identity(m, m) + c * base;
  return out;
}

// Edge-list text format:
//   m <count>
//   i j
//   ...
// Blank lines and '#' comments are ignored.

inline Graph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t m = 0;
  bool have_header = false;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string first;
    if (!(tokens >> first)) continue;
    if (!have_header) {
      if (first != "m" || !(tokens >> m)) {
        throw ParseError(line_no, "expected header 'm <count>'");
      }
      std::string extra;
      if (tokens >> extra) {
        throw ParseError(line_no, "trailing token '" + extra + "'");
      }
      have_header = true;
    } else {
      std::size_t i = 0;
      std::size_t j = 0;
      std::istringstream pair(line);
      if (!(pair >> i >> j)) {
        throw ParseError(line_no, "expected edge 'i j'");
      }
      std::string extra;
      if (pair >> extra) {
        throw ParseError(line_no, "trailing token '" + extra + "'");
      }
      edges.emplace_back(i, j);
    }
  }
  if (!have_header) {
    throw ParseError(line_no, "missing header 'm <count>'");
  }
  return Graph(m, std::move(edges));
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
  out << "m " << g.agents() << '\n';
  for (const auto& [i, j] : g.edges()) out << i << ' ' << j << '\n';
}

}  // namespace datos
