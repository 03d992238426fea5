#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spreadmon/errors.hpp"

namespace spreadmon {

/**
 * CSV ingestion and emission. Input headers accepted:
 *   date,y    (or t,y)     -> univariate spread series
 *   date,x,y  (or t,x,y)   -> univariate series (x column ignored)
 *   date,p1,p2 (or t,p1,p2) -> price pair, routed through FLS
 * The first column is an opaque pass-through label. Rows whose numeric cells
 * fail to parse are rejected and reported with their 1-based line numbers.
 * All numeric output is printed with 12 significant digits.
 */

enum class SeriesKind { univariate, pair };

struct IngestedSeries {
  SeriesKind kind = SeriesKind::univariate;
  std::vector<std::string> dates;
  std::vector<double> col1;  // y, or p1 for pairs
  std::vector<double> col2;  // p2 for pairs (empty otherwise)
  std::vector<long> rejected_lines;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline std::string trim(std::string s) {
  const auto is_space = [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.erase(s.begin());
  while (!s.empty() && is_space(s.back())) s.pop_back();
  return s;
}

inline bool parse_double(const std::string& cell, double& out) {
  const std::string text = trim(cell);
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace detail

/// Formats a double with 12 significant digits (the CSV output precision).
inline std::string format_sig12(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

inline IngestedSeries ingest_csv(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file)
    throw IoError(IoError::Kind::missing_file,
                  "cannot open input file: " + path.string());

  std::string line;
  if (!std::getline(file, line))
    throw IoError(IoError::Kind::bad_header,
                  "input file has no header row: " + path.string());

  auto header = detail::split_csv_line(line);
  for (auto& cell : header) cell = detail::trim(cell);

  IngestedSeries out;
  bool skip_middle_column = false;
  const bool label_ok =
      !header.empty() && (header[0] == "date" || header[0] == "t");
  if (label_ok && header.size() == 2 && header[1] == "y") {
    out.kind = SeriesKind::univariate;
  } else if (label_ok && header.size() == 3 && header[1] == "x" &&
             header[2] == "y") {
    out.kind = SeriesKind::univariate;
    skip_middle_column = true;
  } else if (label_ok && header.size() == 3 && header[1] == "p1" &&
             header[2] == "p2") {
    out.kind = SeriesKind::pair;
  } else {
    throw IoError(IoError::Kind::bad_header,
                  "unrecognized header (expected date,y | date,x,y | "
                  "date,p1,p2): " + line);
  }
  const std::size_t expected_cells = header.size();

  long line_number = 1;
  while (std::getline(file, line)) {
    ++line_number;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    double a = 0;
    double b = 0;
    bool ok = cells.size() == expected_cells;
    if (ok) {
      if (out.kind == SeriesKind::univariate) {
        ok = detail::parse_double(cells[skip_middle_column ? 2 : 1], a);
      } else {
        ok = detail::parse_double(cells[1], a) &&
             detail::parse_double(cells[2], b);
      }
    }
    if (!ok) {
      out.rejected_lines.push_back(line_number);
      continue;
    }
    out.dates.push_back(detail::trim(cells[0]));
    out.col1.push_back(a);
    if (out.kind == SeriesKind::pair) out.col2.push_back(b);
  }

  if (out.col1.empty())
    throw IoError(IoError::Kind::empty_body,
                  "input file has no data rows: " + path.string());
  return out;
}

}  // namespace spreadmon
