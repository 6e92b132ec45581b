#pragma once

// Closed-form problem descriptions and the named presets shipped with the
// library. A Scenario is sampled onto any pair of grids, which is what lets a
// round trip generate data on a fine grid and invert on a coarse one.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "thermemo/error.hpp"
#include "thermemo/forward_solver.hpp"
#include "thermemo/functions.hpp"
#include "thermemo/hysteresis.hpp"
#include "thermemo/inverse_solver.hpp"

namespace thermemo {

struct Scenario {
  std::string name = "custom";
  double t_end = 1.0;

  SpaceFunction a = SpaceFunction::constant(1.0);
  double b1_left = -1.0, b1_right = 1.0;
  double b0_left = 0.0, b0_right = 0.0;

  SpaceFunction u0 = SpaceFunction::constant(0.0);
  SpaceFunction omega = SpaceFunction::bump();
  SpaceFunction omega1 = SpaceFunction::constant(1.0);
  double omega2_left = 0.0, omega2_right = 0.0;

  double epsilon = 1.0;
  double phi0 = 0.0;
  TimeFunction u_c = TimeFunction::constant(0.0);
  BoundaryPair<TimeFunction> u_a{TimeFunction::constant(0.0), TimeFunction::constant(0.0)};
  BoundaryPair<TimeFunction> u_b{TimeFunction::constant(0.0), TimeFunction::constant(0.0)};
  BoundaryPair<TimeFunction> q{TimeFunction::constant(0.0), TimeFunction::constant(0.0)};
  SourceFunction f;

  /// Play/identity initial output NaN means "start at M(u0)".
  MemoryOperatorSpec memory = PlaySpec{0.1, std::numeric_limits<double>::quiet_NaN()};
  TimeFunction kernel = TimeFunction::constant(0.0);  // h used to generate data

  /// Optional closed-form solution (manufactured presets only).
  std::function<double(double, double)> exact_u;
};

namespace detail {

inline MemoryOperatorSpec resolve_memory(MemoryOperatorSpec spec, double m_u0) {
  if (auto* p = std::get_if<PlaySpec>(&spec); p && std::isnan(p->initial_output)) p->initial_output = m_u0;
  if (auto* s = std::get_if<ScaledIdentitySpec>(&spec); s && std::isnan(s->initial_output)) s->initial_output = m_u0;
  return spec;
}

}  // namespace detail

inline Coefficients sample_coefficients(const Scenario& s, const SpaceGrid& sg) {
  return {s.a.sample(sg), s.b1_left, s.b1_right, s.b0_left, s.b0_right};
}

inline MeasurementWeights sample_weights(const Scenario& s, const SpaceGrid& sg) {
  return {s.omega.sample(sg), s.omega1.sample(sg), s.omega2_left, s.omega2_right};
}

inline ThermostatParams sample_thermostat(const Scenario& s, const TimeGrid& tg) {
  return {s.epsilon,          s.phi0,           s.u_c.sample(tg), sample(s.u_a, tg), sample(s.u_b, tg),
          sample(s.u_a, tg, 1), sample(s.u_b, tg, 1)};
}

inline MemoryOperatorSpec sample_memory(const Scenario& s, const SpaceGrid& sg) {
  const SpaceField u0 = s.u0.sample(sg);
  return detail::resolve_memory(s.memory, measure_M(sample_weights(s, sg), u0.values(), sg.dx()));
}

inline ForwardProblem make_forward_problem(const Scenario& s, const TimeGrid& tg, const SpaceGrid& sg) {
  ForwardProblem p;
  p.tgrid = tg;
  p.sgrid = sg;
  p.coeffs = sample_coefficients(s, sg);
  p.thermostat = sample_thermostat(s, tg);
  p.weights = sample_weights(s, sg);
  p.memory = sample_memory(s, sg);
  p.f = s.f.sample(tg, sg);
  p.q = sample(s.q, tg);
  p.u0 = s.u0.sample(sg);
  p.h = s.kernel.sample(tg);
  return p;
}

/// Inverse problem for measured data g on the grid of g. Derivatives of g come
/// from smooth_diff with the given window.
inline InverseProblem make_inverse_problem(const Scenario& s, const SpaceGrid& sg, const TimeSeries& g,
                                           std::size_t smoothing_window = 1) {
  const TimeGrid& tg = g.grid();
  InverseProblem p;
  p.tgrid = tg;
  p.sgrid = sg;
  p.coeffs = sample_coefficients(s, sg);
  p.thermostat = sample_thermostat(s, tg);
  p.weights = sample_weights(s, sg);
  p.memory = sample_memory(s, sg);
  p.f = s.f.sample(tg, sg);
  p.df = s.f.sample(tg, sg, 1);
  p.q = sample(s.q, tg);
  p.dq = sample(s.q, tg, 1);
  p.u0 = s.u0.sample(sg);
  p.g = g;
  p.smoothing_window = smoothing_window;
  return p;
}

namespace presets {

namespace detail {

/// Smallest positive root of k tan(k/2) = 1: cos(k (x - 1/2)) is then the slowest
/// eigenmode of A with the boundary relation B psi + psi = 0.
inline double robin_wavenumber() {
  double lo = 0.5, hi = 3.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mid * std::tan(0.5 * mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Thermostat-controlled slab with a play operator in the loop and kernel
/// h(t) = c exp(-t). u0 = 1 + 0.2 cos(pi x) + C (psi(x) - psi(0)) where psi is the
/// slowest eigenmode, so that Phi(A u0) != 0 without fast transients. f and q are
/// chosen for this c so that, were u_e frozen at its initial value, the solution
/// would be u = 1 + 0.2 cos(pi x) - C psi(0) + C exp(-t/2) psi(x).
inline Scenario eigenmode_family(const std::string& name, double c) {
  using std::numbers::pi;
  Scenario s;
  s.name = name;
  s.t_end = 1.0;
  const double k = robin_wavenumber();
  const double lambda = k * k;
  const double amp = 30.0;
  const double psi0 = std::cos(0.5 * k);
  const SpaceFunction psi{{}, {{1.0, k, -0.5 * k}}};
  const SpaceFunction odd = SpaceFunction::fourier(0.0, {0.2});

  s.u0 = SpaceFunction::constant(1.0 - amp * psi0).add(odd).add(psi.scaled(amp));
  // odd part held fixed against A u + h * A u; even part decays like exp(-t/2)
  s.f.terms.push_back({TimeFunction::exponentials(1.0 + c, {-c}, {1.0}), odd.scaled(pi * pi)});
  s.f.terms.push_back(
      {TimeFunction::exponentials(0.0, {amp * ((1.0 + 2.0 * c) * lambda - 0.5), -2.0 * c * amp * lambda}, {0.5, 1.0}),
       psi});

  s.epsilon = 0.25;
  s.phi0 = 1.0;
  const double m_u0 = 1.0 + amp * (2.0 / k * std::sin(0.5 * k) - psi0);  // integral of u0
  s.u_c = TimeFunction::constant(s.phi0 - m_u0);                         // phi'(0) = 0
  s.u_a = {TimeFunction::constant(-0.5), TimeFunction::constant(-0.5)};
  s.u_b = {TimeFunction::constant(2.0), TimeFunction::constant(2.0)};
  const double ue0 = s.phi0 * -0.5 + 2.0;
  // q = u_e(0) - 1 -+ 0.2 + C psi(0) + (h * C exp(-t/2)) psi(0)
  const double base = ue0 - 1.0 + amp * psi0;
  const double tail = 2.0 * c * amp * psi0;
  s.q = {TimeFunction::exponentials(base - 0.2, {tail, -tail}, {0.5, 1.0}),
         TimeFunction::exponentials(base + 0.2, {tail, -tail}, {0.5, 1.0})};
  s.memory = PlaySpec{0.1, std::numeric_limits<double>::quiet_NaN()};
  s.kernel = TimeFunction::exponential(c, 1.0);
  return s;
}

}  // namespace detail

inline Scenario exp_kernel() { return detail::eigenmode_family("exp_kernel", 1.0); }

inline Scenario zero_kernel() { return detail::eigenmode_family("zero_kernel", 0.0); }

inline Scenario preisach_kernel() {
  Scenario s = exp_kernel();
  s.name = "preisach_kernel";
  s.memory = PreisachSpec::uniform_grid(0.5, 1.5, 11, 0.2);
  return s;
}

/// Same data with Phi(A u0) = 0: cos(pi x) is odd about x = 1/2 while omega is even.
inline Scenario chi_singular() {
  Scenario s = exp_kernel();
  s.name = "chi_singular";
  s.u0 = SpaceFunction::fourier(1.0, {0.2});
  s.f.terms.clear();
  s.u_c = TimeFunction::constant(0.0);
  const double ue0 = s.phi0 * -0.5 + 2.0;
  s.q = {TimeFunction::constant(ue0 - s.u0.eval(0.0)), TimeFunction::constant(ue0 - s.u0.eval(1.0))};
  return s;
}

/// Boundary history q that disagrees with the initial state at t = 0.
inline Scenario incompatible_boundary() {
  Scenario s = exp_kernel();
  s.name = "incompatible_boundary";
  s.q.left.params[0] += 1.0;
  s.q.right.params[0] += 1.0;
  return s;
}

/// u = exp(-t) sin(pi x), h = 0, decoupled feedback (u_A = 0, u_B = 0).
inline Scenario manufactured() {
  using std::numbers::pi;
  Scenario s;
  s.name = "manufactured";
  s.u0 = SpaceFunction::fourier(0.0, {}, {1.0});
  s.f.terms.push_back({TimeFunction::exponential(pi * pi - 1.0, 1.0), SpaceFunction::fourier(0.0, {}, {1.0})});
  s.q = {TimeFunction::exponential(pi, 1.0), TimeFunction::exponential(pi, 1.0)};
  s.memory = ScaledIdentitySpec{0.0, 0.0};
  s.kernel = TimeFunction::constant(0.0);
  s.exact_u = [](double t, double x) { return std::exp(-t) * std::sin(pi * x); };
  return s;
}

/// Robin heat equation with zero data: the L2 norm of u can only decay.
inline Scenario dissipative() {
  Scenario s;
  s.name = "dissipative";
  s.u0 = SpaceFunction::fourier(1.0, {0.2, 0.8});
  s.memory = ScaledIdentitySpec{0.0, 0.0};
  return s;
}

/// u = 1 for all t: phi stays at phi0 = W(M(1)) = 1 and u_e = u.
inline Scenario stationary() {
  Scenario s;
  s.name = "stationary";
  s.u0 = SpaceFunction::constant(1.0);
  s.epsilon = 0.5;
  s.phi0 = 1.0;
  s.u_a = {TimeFunction::constant(1.0), TimeFunction::constant(1.0)};
  s.memory = PlaySpec{0.1, std::numeric_limits<double>::quiet_NaN()};
  s.kernel = TimeFunction::exponential(1.0, 1.0);
  return s;
}

inline std::vector<std::string> names() {
  return {"exp_kernel",   "zero_kernel", "preisach_kernel", "chi_singular", "incompatible_boundary",
          "manufactured", "dissipative", "stationary"};
}

inline Scenario by_name(const std::string& name) {
  if (name == "exp_kernel") return exp_kernel();
  if (name == "zero_kernel") return zero_kernel();
  if (name == "preisach_kernel") return preisach_kernel();
  if (name == "chi_singular") return chi_singular();
  if (name == "incompatible_boundary") return incompatible_boundary();
  if (name == "manufactured") return manufactured();
  if (name == "dissipative") return dissipative();
  if (name == "stationary") return stationary();
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace presets
}  // namespace thermemo
