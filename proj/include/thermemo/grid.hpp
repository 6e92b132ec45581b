#pragma once

// Uniform time/space grids, sampled fields and trapezoid quadrature.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thermemo/error.hpp"

namespace thermemo {

/// Uniform grid t_n = n*dt, n = 0..N on [0, T].
class TimeGrid {
 public:
  TimeGrid() = default;

  /// Full simulation grid; requires T > 0 and N >= 2.
  TimeGrid(double t_end, std::size_t steps) : dt_(t_end / static_cast<double>(steps)), steps_(steps) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidSpec("TimeGrid: t_end must be positive");
    if (steps < 2) throw InvalidSpec("TimeGrid: at least 2 steps required");
  }

  /// Sub-window grid with a given spacing; any step count, including 0.
  static TimeGrid with_step(double dt, std::size_t steps) {
    if (!(dt > 0.0)) throw InvalidSpec("TimeGrid: dt must be positive");
    TimeGrid g;
    g.dt_ = dt;
    g.steps_ = steps;
    return g;
  }

  double dt() const { return dt_; }
  std::size_t steps() const { return steps_; }
  std::size_t size() const { return steps_ + 1; }
  double t_end() const { return dt_ * static_cast<double>(steps_); }
  double node(std::size_t n) const { return dt_ * static_cast<double>(n); }

  /// First m+1 nodes of this grid.
  TimeGrid prefix(std::size_t m) const { return with_step(dt_, m); }

  bool operator==(const TimeGrid& other) const {
    return steps_ == other.steps_ && std::abs(dt_ - other.dt_) <= 1e-13 * std::max(dt_, other.dt_);
  }

 private:
  double dt_ = 1.0;
  std::size_t steps_ = 0;
};

/// Uniform grid x_i = i*dx on the unit interval, i = 0..M.
class SpaceGrid {
 public:
  SpaceGrid() = default;
  explicit SpaceGrid(std::size_t cells) : cells_(cells) {
    if (cells < 4) throw InvalidSpec("SpaceGrid: at least 4 cells required");
  }

  std::size_t cells() const { return cells_; }
  std::size_t size() const { return cells_ + 1; }
  double dx() const { return 1.0 / static_cast<double>(cells_); }
  double node(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(cells_); }

  bool operator==(const SpaceGrid& other) const { return cells_ == other.cells_; }

 private:
  std::size_t cells_ = 4;
};

template <typename T>
struct BoundaryPair {
  T left{};
  T right{};
};

class TimeSeries {
 public:
  TimeSeries() = default;
  explicit TimeSeries(const TimeGrid& grid) : grid_(grid), values_(grid.size(), 0.0) {}
  TimeSeries(const TimeGrid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw GridMismatch("TimeSeries: length does not match grid");
  }

  static TimeSeries constant(const TimeGrid& grid, double c) {
    return TimeSeries(grid, std::vector<double>(grid.size(), c));
  }

  template <typename F>
  static TimeSeries sample(const TimeGrid& grid, F&& fn) {
    TimeSeries s(grid);
    for (std::size_t n = 0; n < grid.size(); ++n) s.values_[n] = fn(grid.node(n));
    return s;
  }

  const TimeGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t n) { return values_[n]; }
  double operator[](std::size_t n) const { return values_[n]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double back() const { return values_.back(); }

  /// Restriction to the first m+1 nodes.
  TimeSeries prefix(std::size_t m) const {
    if (m >= size()) throw IndexOutOfRange("TimeSeries::prefix: index out of range");
    return TimeSeries(grid_.prefix(m), std::vector<double>(values_.begin(), values_.begin() + static_cast<long>(m) + 1));
  }

  TimeSeries& operator+=(const TimeSeries& o) {
    check_same(o);
    for (std::size_t n = 0; n < size(); ++n) values_[n] += o.values_[n];
    return *this;
  }
  TimeSeries& operator-=(const TimeSeries& o) {
    check_same(o);
    for (std::size_t n = 0; n < size(); ++n) values_[n] -= o.values_[n];
    return *this;
  }
  TimeSeries& operator*=(double a) {
    for (double& x : values_) x *= a;
    return *this;
  }
  friend TimeSeries operator+(TimeSeries a, const TimeSeries& b) { return a += b; }
  friend TimeSeries operator-(TimeSeries a, const TimeSeries& b) { return a -= b; }
  friend TimeSeries operator*(double s, TimeSeries a) { return a *= s; }

  void check_same(const TimeSeries& o) const {
    if (!(grid_ == o.grid_)) throw GridMismatch("TimeSeries: grid mismatch");
  }

 private:
  TimeGrid grid_;
  std::vector<double> values_;
};

class SpaceField {
 public:
  SpaceField() = default;
  explicit SpaceField(const SpaceGrid& grid) : grid_(grid), values_(grid.size(), 0.0) {}
  SpaceField(const SpaceGrid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw GridMismatch("SpaceField: length does not match grid");
  }

  static SpaceField constant(const SpaceGrid& grid, double c) {
    return SpaceField(grid, std::vector<double>(grid.size(), c));
  }

  template <typename F>
  static SpaceField sample(const SpaceGrid& grid, F&& fn) {
    SpaceField s(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) s.values_[i] = fn(grid.node(i));
    return s;
  }

  const SpaceGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }

  SpaceField& operator+=(const SpaceField& o) {
    check_same(o);
    for (std::size_t i = 0; i < size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  SpaceField& operator-=(const SpaceField& o) {
    check_same(o);
    for (std::size_t i = 0; i < size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  SpaceField& operator*=(double a) {
    for (double& x : values_) x *= a;
    return *this;
  }
  friend SpaceField operator+(SpaceField a, const SpaceField& b) { return a += b; }
  friend SpaceField operator-(SpaceField a, const SpaceField& b) { return a -= b; }
  friend SpaceField operator*(double s, SpaceField a) { return a *= s; }

  void check_same(const SpaceField& o) const {
    if (!(grid_ == o.grid_)) throw GridMismatch("SpaceField: grid mismatch");
  }

 private:
  SpaceGrid grid_;
  std::vector<double> values_;
};

/// Row n holds the spatial snapshot at t_n.
class SpaceTimeField {
 public:
  SpaceTimeField() = default;
  SpaceTimeField(const TimeGrid& tgrid, const SpaceGrid& sgrid)
      : tgrid_(tgrid), sgrid_(sgrid), values_(tgrid.size() * sgrid.size(), 0.0) {}

  template <typename F>
  static SpaceTimeField sample(const TimeGrid& tg, const SpaceGrid& sg, F&& fn) {
    SpaceTimeField u(tg, sg);
    for (std::size_t n = 0; n < tg.size(); ++n)
      for (std::size_t i = 0; i < sg.size(); ++i) u.at(n, i) = fn(tg.node(n), sg.node(i));
    return u;
  }

  const TimeGrid& tgrid() const { return tgrid_; }
  const SpaceGrid& sgrid() const { return sgrid_; }
  std::size_t rows() const { return tgrid_.size(); }
  std::size_t cols() const { return sgrid_.size(); }

  double& at(std::size_t n, std::size_t i) { return values_[n * cols() + i]; }
  double at(std::size_t n, std::size_t i) const { return values_[n * cols() + i]; }

  std::span<double> row(std::size_t n) { return {values_.data() + n * cols(), cols()}; }
  std::span<const double> row(std::size_t n) const { return {values_.data() + n * cols(), cols()}; }

  SpaceField snapshot(std::size_t n) const {
    auto r = row(n);
    return SpaceField(sgrid_, std::vector<double>(r.begin(), r.end()));
  }
  void set_snapshot(std::size_t n, const SpaceField& f) {
    if (!(f.grid() == sgrid_)) throw GridMismatch("SpaceTimeField: snapshot grid mismatch");
    std::copy(f.values().begin(), f.values().end(), row(n).begin());
  }

  /// Time series at a fixed spatial node.
  TimeSeries column(std::size_t i) const {
    TimeSeries s(tgrid_);
    for (std::size_t n = 0; n < rows(); ++n) s[n] = at(n, i);
    return s;
  }
  BoundaryPair<TimeSeries> traces() const { return {column(0), column(cols() - 1)}; }

  SpaceTimeField prefix(std::size_t m) const {
    if (m >= rows()) throw IndexOutOfRange("SpaceTimeField::prefix: index out of range");
    SpaceTimeField out(tgrid_.prefix(m), sgrid_);
    std::copy(values_.begin(), values_.begin() + static_cast<long>((m + 1) * cols()), out.values_.begin());
    return out;
  }

  std::span<const double> values() const { return values_; }

 private:
  TimeGrid tgrid_;
  SpaceGrid sgrid_;
  std::vector<double> values_;
};

using BoundarySeries = BoundaryPair<TimeSeries>;

inline double trapezoid_weight(std::size_t i, std::size_t last) { return (i == 0 || i == last) ? 0.5 : 1.0; }

/// Trapezoid approximation of the integral of f*g over the unit interval.
inline double inner_space(std::span<const double> f, std::span<const double> g, double dx) {
  const std::size_t last = f.size() - 1;
  double acc = 0.0;
  for (std::size_t i = 0; i <= last; ++i) acc += trapezoid_weight(i, last) * f[i] * g[i];
  return acc * dx;
}

inline double inner_space(const SpaceField& f, const SpaceField& g) {
  f.check_same(g);
  return inner_space(f.values(), g.values(), f.grid().dx());
}

inline double l2_space(const SpaceField& f) { return std::sqrt(inner_space(f, f)); }

inline double l2_time(const TimeSeries& f) {
  const std::size_t last = f.size() - 1;
  double acc = 0.0;
  for (std::size_t n = 0; n <= last; ++n) acc += trapezoid_weight(n, last) * f[n] * f[n];
  return std::sqrt(acc * f.grid().dt());
}

inline double l1_time(const TimeSeries& f) {
  const std::size_t last = f.size() - 1;
  double acc = 0.0;
  for (std::size_t n = 0; n <= last; ++n) acc += trapezoid_weight(n, last) * std::abs(f[n]);
  return acc * f.grid().dt();
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Discrete L2(Q_T) norm: trapezoid in both directions.
inline double l2_space_time(const SpaceTimeField& u) {
  const std::size_t last = u.rows() - 1;
  double acc = 0.0;
  for (std::size_t n = 0; n <= last; ++n) {
    auto r = u.row(n);
    acc += trapezoid_weight(n, last) * inner_space(r, r, u.sgrid().dx());
  }
  return std::sqrt(acc * u.tgrid().dt());
}

/// Cumulative trapezoid integral (1 * v)(t_n); output[0] = 0.
inline TimeSeries antiderivative(const TimeSeries& v) {
  TimeSeries out(v.grid());
  const double half_dt = 0.5 * v.grid().dt();
  for (std::size_t n = 1; n < v.size(); ++n) out[n] = out[n - 1] + half_dt * (v[n - 1] + v[n]);
  return out;
}

/// Node-wise antiderivative in time of a space-time field.
inline SpaceTimeField antiderivative(const SpaceTimeField& v) {
  SpaceTimeField out(v.tgrid(), v.sgrid());
  const double half_dt = 0.5 * v.tgrid().dt();
  for (std::size_t n = 1; n < v.rows(); ++n) {
    auto prev = out.row(n - 1);
    auto cur = out.row(n);
    auto a = v.row(n - 1);
    auto b = v.row(n);
    for (std::size_t i = 0; i < v.cols(); ++i) cur[i] = prev[i] + half_dt * (a[i] + b[i]);
  }
  return out;
}

/// Keeps every k-th node of a fine series on a coarser aligned grid.
inline TimeSeries restrict_to(const TimeSeries& fine, const TimeGrid& coarse) {
  const std::size_t nf = fine.grid().steps();
  const std::size_t nc = coarse.steps();
  if (nc == 0 || nf % nc != 0 || std::abs(fine.grid().t_end() - coarse.t_end()) > 1e-12 * coarse.t_end())
    throw GridMismatch("restrict_to: grids are not aligned");
  const std::size_t k = nf / nc;
  TimeSeries out(coarse);
  for (std::size_t n = 0; n < coarse.size(); ++n) out[n] = fine[n * k];
  return out;
}

inline SpaceTimeField restrict_to(const SpaceTimeField& fine, const TimeGrid& tg, const SpaceGrid& sg) {
  const std::size_t nf = fine.tgrid().steps(), nc = tg.steps();
  const std::size_t mf = fine.sgrid().cells(), mc = sg.cells();
  if (nf % nc != 0 || mf % mc != 0 || std::abs(fine.tgrid().t_end() - tg.t_end()) > 1e-12 * tg.t_end())
    throw GridMismatch("restrict_to: grids are not aligned");
  const std::size_t kt = nf / nc, kx = mf / mc;
  SpaceTimeField out(tg, sg);
  for (std::size_t n = 0; n < tg.size(); ++n)
    for (std::size_t i = 0; i < sg.size(); ++i) out.at(n, i) = fine.at(n * kt, i * kx);
  return out;
}

}  // namespace thermemo
