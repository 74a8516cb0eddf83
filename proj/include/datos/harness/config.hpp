#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "datos/errors.hpp"

namespace datos {

// Structured text configuration:
//
//   # comment
//   [section]
//   key = value
//
// Keys are addressed as "section.key". Values are trimmed; a value may be a
// comma-separated list where the consumer accepts one.

struct ConfigEntry {
  std::string value;
  std::size_t line = 0;
};

class ConfigDocument {
 public:
  static ConfigDocument parse(std::istream& in) {
    ConfigDocument doc;
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string text = trim(line);
      if (text.empty()) continue;
      if (text.front() == '[') {
        if (text.back() != ']' || text.size() < 3) {
          throw ParseError(line_no, "malformed section header '" + text + "'");
        }
        section = trim(text.substr(1, text.size() - 2));
        if (section.empty() || section.find_first_of(" \t[]=") != std::string::npos) {
          throw ParseError(line_no, "invalid section name '" + section + "'");
        }
        continue;
      }
      const auto eq = text.find('=');
      if (eq == std::string::npos) {
        throw ParseError(line_no, "expected 'key = value'");
      }
      const std::string key = trim(text.substr(0, eq));
      const std::string value = trim(text.substr(eq + 1));
      if (key.empty() || key.find_first_of(" \t[]") != std::string::npos) {
        throw ParseError(line_no, "invalid key '" + key + "'");
      }
      if (section.empty()) {
        throw ParseError(line_no, "key '" + key + "' appears before any section header");
      }
      const std::string full = section + "." + key;
      if (doc.entries_.count(full) != 0) {
        throw ParseError(line_no, "duplicate key '" + full + "'");
      }
      doc.entries_[full] = ConfigEntry{value, line_no};
    }
    return doc;
  }

  static ConfigDocument parse(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  const ConfigEntry* find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  void set(const std::string& key, std::string value) { entries_[key] = ConfigEntry{std::move(value), 0}; }

  const std::map<std::string, ConfigEntry>& entries() const noexcept { return entries_; }

  /// Throws ConfigError naming the first key not in `known`.
  void reject_unknown(const std::set<std::string>& known) const {
    for (const auto& [key, entry] : entries_) {
      if (known.count(key) == 0) {
        throw ConfigError(where(entry) + "unknown key '" + key + "'");
      }
    }
  }

  static std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
  }

  static std::string where(const ConfigEntry& entry) {
    return entry.line == 0 ? std::string() : "line " + std::to_string(entry.line) + ": ";
  }

 private:
  std::map<std::string, ConfigEntry> entries_;
};

namespace config_value {

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) out.push_back(ConfigDocument::trim(item));
  if (!value.empty() && value.back() == ',') out.emplace_back();
  return out;
}

inline double to_double(const std::string& key, const std::string& text) {
  if (text.empty()) throw ConfigError(key + ": expected a number");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE) {
    throw ConfigError(key + ": invalid number '" + text + "'");
  }
  return v;
}

inline std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
  if (text.empty() || text.front() == '-' || text.front() == '+') {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + text + "'");
  }
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size() || errno == ERANGE) {
    throw ConfigError(key + ": invalid integer '" + text + "'");
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace config_value

}  // namespace datos
