#pragma once

#include <algorithm>
#include <cerrno>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "datos/errors.hpp"

namespace datos {

struct SparseRow {
  double label = 0.0;
  /// (0-based index, value) in input order; indices are distinct.
  std::vector<std::pair<std::size_t, double>> features;

  friend bool operator==(const SparseRow&, const SparseRow&) = default;
};

struct Dataset {
  std::vector<SparseRow> rows;
  std::size_t dim = 0;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

namespace detail {

inline bool parse_real(const std::string& token, double& out) {
  if (token.empty()) return false;
  const char* begin = token.c_str();
  char* end = nullptr;
  errno = 0;
  out = std::strtod(begin, &end);
  return end == begin + token.size() && errno != ERANGE;
}

inline bool parse_index(const std::string& token, long long& out) {
  if (token.empty()) return false;
  const char* begin = token.c_str();
  char* end = nullptr;
  errno = 0;
  out = std::strtoll(begin, &end, 10);
  return end == begin + token.size() && errno != ERANGE;
}

inline std::string format_real(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

}  // namespace detail

/// Parses LIBSVM text: `<label> (<index>:<value>)*` per line, 1-based
/// indices, `#` comments. Indices are converted to 0-based.
inline Dataset parse_libsvm(std::istream& in) {
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;

    SparseRow row;
    if (!detail::parse_real(token, row.label)) {
      throw ParseError(line_no, "invalid label '" + token + "'");
    }
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) {
        throw ParseError(line_no, "expected <index>:<value>, got '" + token + "'");
      }
      long long index = 0;
      double value = 0.0;
      if (!detail::parse_index(token.substr(0, colon), index)) {
        throw ParseError(line_no, "invalid feature index in '" + token + "'");
      }
      if (index < 1) {
        throw ParseError(line_no, "feature index must be >= 1 in '" + token + "'");
      }
      if (!detail::parse_real(token.substr(colon + 1), value)) {
        throw ParseError(line_no, "invalid feature value in '" + token + "'");
      }
      const auto zero_based = static_cast<std::size_t>(index - 1);
      for (const auto& [seen, unused] : row.features) {
        if (seen == zero_based) {
          throw ParseError(line_no, "duplicate feature index " + std::to_string(index));
        }
      }
      row.features.emplace_back(zero_based, value);
      data.dim = std::max(data.dim, zero_based + 1);
    }
    data.rows.push_back(std::move(row));
  }
  return data;
}

inline Dataset parse_libsvm(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in);
}

inline void write_libsvm(std::ostream& out, const Dataset& data) {
  for (const auto& row : data.rows) {
    out << detail::format_real(row.label);
    for (const auto& [index, value] : row.features) {
      out << ' ' << (index + 1) << ':' << detail::format_real(value);
    }
    out << '\n';
  }
}

inline std::string serialize_libsvm(const Dataset& data) {
  std::ostringstream out;
  write_libsvm(out, data);
  return out.str();
}

struct Partition {
  std::vector<Dataset> shards;
  std::size_t dropped = 0;
  std::string warning;  // empty unless rows were dropped
};

/// Contiguous equal shards in input order. Trailing rows beyond the largest
/// multiple of m are dropped. Every shard keeps the full dataset's dim.
inline Partition partition_dataset(const Dataset& data, std::size_t m) {
  if (m == 0 || m > data.rows.size()) {
    throw ConfigError("partition_dataset: need 1 <= m <= row count (m=" + std::to_string(m) +
                      ", rows=" + std::to_string(data.rows.size()) + ")");
  }
  const std::size_t per_shard = data.rows.size() / m;
  Partition out;
  out.dropped = data.rows.size() - per_shard * m;
  if (out.dropped > 0) {
    out.warning = "partition_dataset: dropped " + std::to_string(out.dropped) +
                  " trailing rows so that every agent holds " + std::to_string(per_shard);
  }
  for (std::size_t i = 0; i < m; ++i) {
    Dataset shard;
    shard.dim = data.dim;
    shard.rows.assign(data.rows.begin() + static_cast<std::ptrdiff_t>(i * per_shard),
                      data.rows.begin() + static_cast<std::ptrdiff_t>((i + 1) * per_shard));
    out.shards.push_back(std::move(shard));
  }
  return out;
}

}  // namespace datos
