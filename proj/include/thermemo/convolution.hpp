#pragma once

// Causal time convolution (h * f)(t) = int_0^t h(t-s) f(s) ds by trapezoid
// product quadrature, its restriction/splitting algebra and the scalar
// second-kind Volterra node solve.

#include <cmath>
#include <cstddef>
#include <span>

#include "thermemo/error.hpp"
#include "thermemo/grid.hpp"

namespace thermemo {

/// Trapezoid sum dt * sum_{j=lo..hi}' h[n-j] f[j] with half weights at j = lo and j = hi.
inline double trapezoid_panel_sum(std::span<const double> h, std::span<const double> f, std::size_t n, std::size_t lo,
                                  std::size_t hi, double dt) {
  if (hi <= lo) return 0.0;
  double acc = 0.5 * (h[n - lo] * f[lo] + h[n - hi] * f[hi]);
  for (std::size_t j = lo + 1; j < hi; ++j) acc += h[n - j] * f[j];
  return dt * acc;
}

/// Single node of the convolution: dt*(h0 f_n/2 + sum_{k=1}^{n-1} h_k f_{n-k} + h_n f_0/2).
inline double convolve_at(std::span<const double> h, std::span<const double> f, std::size_t n, double dt) {
  return trapezoid_panel_sum(h, f, n, 0, n, dt);
}

inline TimeSeries convolve(const TimeSeries& h, const TimeSeries& f) {
  h.check_same(f);
  TimeSeries out(h.grid());
  const double dt = h.grid().dt();
  for (std::size_t n = 1; n < out.size(); ++n) out[n] = convolve_at(h.values(), f.values(), n, dt);
  return out;
}

inline double convolve_partial(const TimeSeries& h, const TimeSeries& f, std::size_t n) {
  h.check_same(f);
  if (n >= h.size()) throw IndexOutOfRange("convolve_partial: node index out of range");
  return convolve_at(h.values(), f.values(), n, h.grid().dt());
}

/// Pieces of the convolution split at node m.
///  left:  (h*z) on [0, t_m]
///  right: (h*z)(t_m + t_n) on [0, T - t_m], assembled as
///         (h0~ * z0~)(t_m + t_n) + (h1(.+t_m) * z0)(t_n) + (h0 * z1(.+t_m))(t_n)
/// The discrete pieces partition the trapezoid panels of the full sum, so
/// left and right reproduce the full convolution node-exactly up to rounding.
struct SplitConvolution {
  TimeSeries left;
  TimeSeries right;
  TimeSeries history_part;  // (h0~ * z0~)(t_m + .)
  TimeSeries kernel_tail;   // h1(. + t_m) * z0
  TimeSeries input_tail;    // h0 * z1(. + t_m)
};

inline SplitConvolution split_convolution(const TimeSeries& h, const TimeSeries& z, std::size_t m) {
  h.check_same(z);
  const std::size_t last = h.grid().steps();
  if (m == 0 || m > last) throw IndexOutOfRange("split_convolution: misaligned split index");
  const std::size_t tail = last - m;
  if (tail > m) throw InvalidSpec("split_convolution: decomposition needs T - t_m <= t_m");

  const double dt = h.grid().dt();
  auto hv = h.values();
  auto zv = z.values();

  SplitConvolution s;
  s.left = convolve(h.prefix(m), z.prefix(m));

  const TimeGrid tail_grid = h.grid().prefix(tail);
  s.history_part = TimeSeries(tail_grid);
  s.kernel_tail = TimeSeries(tail_grid);
  s.input_tail = TimeSeries(tail_grid);
  s.right = TimeSeries(tail_grid);

  std::span<const double> h_shift = hv.subspan(m, tail + 1);
  std::span<const double> z_shift = zv.subspan(m, tail + 1);
  for (std::size_t n = 0; n <= tail; ++n) {
    // panels j in [n, m] of the full sum at node m + n
    s.history_part[n] = trapezoid_panel_sum(hv, zv, m + n, n, m, dt);
    s.kernel_tail[n] = convolve_at(h_shift, zv, n, dt);
    s.input_tail[n] = convolve_at(hv, z_shift, n, dt);
    s.right[n] = s.history_part[n] + s.kernel_tail[n] + s.input_tail[n];
  }
  return s;
}

/// Solves h_n = rhs - weight*a*h_n, the implicit trapezoid endpoint of a
/// second-kind Volterra equation.
inline double volterra2_solve_node(double a, double rhs, double weight, std::size_t node = 0) {
  const double denom = 1.0 + weight * a;
  if (!(std::abs(denom) > 1e-12)) throw VolterraSingular(node, denom);
  return rhs / denom;
}

}  // namespace thermemo
