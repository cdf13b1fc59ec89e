#pragma once

// Minimal CSV helpers shared by the distribution and returns-matrix readers.
// No quoting support: cells are plain numbers or bare names.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wcs/core_dist.hpp"
#include "wcs/errors.hpp"

namespace wcs::csv {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

/// Parses a finite double; throws ParseError pointing at (row, column).
inline double parse_number(std::string_view cell, std::size_t row, std::size_t column) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double out = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  if (cell.empty() || ec != std::errc{} || ptr != end || !std::isfinite(out))
    throw ParseError("non-numeric cell '" + std::string(cell) + "'", row, column);
  return out;
}

inline bool looks_numeric(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return !cell.empty() && ec == std::errc{} && ptr == cell.data() + cell.size();
}

/// Reads non-blank lines, stripping a UTF-8 byte-order mark. Returns (line number, text).
inline std::vector<std::pair<std::size_t, std::string>> read_lines(std::istream& in) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (row == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    lines.emplace_back(row, line);
  }
  return lines;
}

/// Shortest decimal text that round-trips to the same double. Negative zero prints as 0.
inline std::string format_number(double x) {
  if (x == 0.0) x = 0.0;
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace wcs::csv

namespace wcs {

/**
 * @brief Reads a distribution from CSV.
 *
 * Accepted layouts: a `value,prob` header followed by two-column rows, or a
 * single `value` column (header optional) read as equally weighted samples.
 */
inline DiscreteDistribution read_distribution_csv(std::istream& in) {
  const auto lines = csv::read_lines(in);
  if (lines.empty()) throw ParseError("empty distribution file", 0, 0);
  const auto header = csv::split(lines.front().second);
  std::size_t first = 0;
  bool weighted = false;
  if (header.size() == 2 && header[0] == "value" && header[1] == "prob") {
    weighted = true;
    first = 1;
  } else if (header.size() == 1 && header[0] == "value") {
    first = 1;
  } else if (header.size() != 1 || !csv::looks_numeric(header[0])) {
    throw ParseError("expected header 'value,prob' or 'value'", lines.front().first, 1);
  }
  std::vector<double> values;
  std::vector<double> probs;
  for (std::size_t l = first; l < lines.size(); ++l) {
    const auto& [row, text] = lines[l];
    const auto cells = csv::split(text);
    if (cells.size() != (weighted ? 2u : 1u))
      throw ParseError("expected " + std::to_string(weighted ? 2 : 1) + " cells, found " +
                           std::to_string(cells.size()),
                       row, 0);
    values.push_back(csv::parse_number(cells[0], row, 1));
    if (weighted) probs.push_back(csv::parse_number(cells[1], row, 2));
  }
  if (values.empty()) throw ParseError("distribution file has a header but no rows", 0, 0);
  if (!weighted) return DiscreteDistribution::empirical(std::move(values));
  return DiscreteDistribution(std::move(values), std::move(probs));
}

inline DiscreteDistribution read_distribution_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0, 0);
  return read_distribution_csv(in);
}

inline void write_distribution_csv(std::ostream& out, const DiscreteDistribution& d) {
  out << "value,prob\n";
  for (std::size_t i = 0; i < d.size(); ++i)
    out << csv::format_number(d.value(i)) << ',' << csv::format_number(d.prob(i)) << '\n';
}

}  // namespace wcs
