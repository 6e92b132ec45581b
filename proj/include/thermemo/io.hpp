#pragma once

// CSV persistence with round-trip precision (17 significant digits).
//   time series:     t,value
//   boundary series: t,left,right
//   space-time:      t,x_0,...,x_M   (one row per time node)

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "thermemo/error.hpp"
#include "thermemo/grid.hpp"

namespace thermemo {

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  return out;
}

inline std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::size_t& columns) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("'" + path + "' is empty");
  columns = 1;
  for (char ch : line)
    if (ch == ',') ++columns;
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double x = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw ConfigError(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
      row.push_back(x);
    }
    if (row.size() != columns)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(columns) + " columns");
    rows.push_back(std::move(row));
  }
  return rows;
}

inline TimeGrid grid_from_times(const std::vector<std::vector<double>>& rows, const std::string& path) {
  if (rows.size() < 3) throw ConfigError("'" + path + "': at least 3 time nodes required");
  const std::size_t steps = rows.size() - 1;
  const double t_end = rows.back()[0];
  if (std::abs(rows.front()[0]) > 1e-12 * std::max(1.0, t_end)) throw ConfigError("'" + path + "': first time must be 0");
  const TimeGrid g(t_end, steps);
  for (std::size_t n = 0; n < rows.size(); ++n)
    if (std::abs(rows[n][0] - g.node(n)) > 1e-9 * g.dt()) throw ConfigError("'" + path + "': time nodes are not uniform");
  return g;
}

}  // namespace detail

inline void write_csv(const std::string& path, const TimeSeries& s, const std::string& column = "value") {
  auto out = detail::open_for_write(path);
  out << "t," << column << '\n';
  for (std::size_t n = 0; n < s.size(); ++n) out << format_double(s.grid().node(n)) << ',' << format_double(s[n]) << '\n';
}

inline void write_csv(const std::string& path, const BoundarySeries& s) {
  s.left.check_same(s.right);
  auto out = detail::open_for_write(path);
  out << "t,left,right\n";
  for (std::size_t n = 0; n < s.left.size(); ++n)
    out << format_double(s.left.grid().node(n)) << ',' << format_double(s.left[n]) << ',' << format_double(s.right[n])
        << '\n';
}

inline void write_csv(const std::string& path, const SpaceTimeField& u) {
  auto out = detail::open_for_write(path);
  out << 't';
  for (std::size_t i = 0; i < u.cols(); ++i) out << ",x_" << i;
  out << '\n';
  for (std::size_t n = 0; n < u.rows(); ++n) {
    out << format_double(u.tgrid().node(n));
    for (double x : u.row(n)) out << ',' << format_double(x);
    out << '\n';
  }
}

/// Reads a "t,value" file; the time column must be uniform and start at 0.
inline TimeSeries read_time_series_csv(const std::string& path) {
  std::size_t columns = 0;
  const auto rows = detail::read_numeric_csv(path, columns);
  if (columns != 2) throw ConfigError("'" + path + "': expected columns t,value");
  const TimeGrid g = detail::grid_from_times(rows, path);
  TimeSeries s(g);
  for (std::size_t n = 0; n < rows.size(); ++n) s[n] = rows[n][1];
  return s;
}

/// Reads a "t,x_0,...,x_M" file.
inline SpaceTimeField read_space_time_csv(const std::string& path) {
  std::size_t columns = 0;
  const auto rows = detail::read_numeric_csv(path, columns);
  if (columns < 6) throw ConfigError("'" + path + "': expected columns t,x_0,...,x_M with M >= 4");
  const TimeGrid tg = detail::grid_from_times(rows, path);
  const SpaceGrid sg(columns - 2);
  SpaceTimeField u(tg, sg);
  for (std::size_t n = 0; n < rows.size(); ++n)
    for (std::size_t i = 0; i < sg.size(); ++i) u.at(n, i) = rows[n][i + 1];
  return u;
}

}  // namespace thermemo
