#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "spreadmon/csv.hpp"
#include "spreadmon/errors.hpp"

namespace spreadmon {

/// Flat key=value configuration text: one pair per line, '#' starts a
/// comment, blank lines ignored. Values are strings until a typed getter
/// parses them.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text) {
    KeyValueConfig config;
    std::stringstream stream{std::string(text)};
    std::string line;
    long line_number = 0;
    while (std::getline(stream, line)) {
      ++line_number;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ArgumentError("config line " + std::to_string(line_number) +
                            ": expected key=value");
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty())
        throw ArgumentError("config line " + std::to_string(line_number) +
                            ": empty key");
      config.values_[key] = value;
    }
    return config;
  }

  static KeyValueConfig parse_file(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file)
      throw IoError(IoError::Kind::missing_file,
                    "cannot open config file: " + path.string());
    std::stringstream buffer;
    buffer << file.rdbuf();
    return parse(buffer.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  std::string get_string(const std::string& key,
                         const std::string& fallback = "") const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double out = 0;
    if (!detail::parse_double(it->second, out))
      throw ArgumentError("config key '" + key + "': not a number: " +
                          it->second);
    return out;
  }

  long get_long(const std::string& key, long fallback) const {
    const double value = get_double(key, static_cast<double>(fallback));
    const long out = static_cast<long>(value);
    if (static_cast<double>(out) != value)
      throw ArgumentError("config key '" + key + "': not an integer");
    return out;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ArgumentError("config key '" + key + "': expected true/false");
  }

  /// Comma-separated list of numbers.
  std::vector<double> get_list(const std::string& key) const {
    std::vector<double> out;
    const auto it = values_.find(key);
    if (it == values_.end()) return out;
    std::stringstream stream(it->second);
    std::string cell;
    while (std::getline(stream, cell, ',')) {
      double value = 0;
      if (!detail::parse_double(cell, value))
        throw ArgumentError("config key '" + key + "': bad list entry: " +
                            cell);
      out.push_back(value);
    }
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace spreadmon
