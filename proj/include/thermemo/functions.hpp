#pragma once

// Closed-form data presets with analytic time/space derivatives.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "thermemo/error.hpp"
#include "thermemo/grid.hpp"

namespace thermemo {

/// Scalar function of time.
///   const: c
///   poly:  sum_k c_k t^k
///   sin:   offset + amp*sin(freq*t + phase)
///   exp:   offset + sum_j amp_j*exp(-rate_j*t),  params = {offset, amp_1, rate_1, amp_2, rate_2, ...}
struct TimeFunction {
  enum class Kind { constant, poly, sine, exponential };
  Kind kind = Kind::constant;
  std::vector<double> params{0.0};

  static TimeFunction constant(double c) { return {Kind::constant, {c}}; }
  static TimeFunction poly(std::vector<double> coeffs) { return {Kind::poly, std::move(coeffs)}; }
  static TimeFunction sine(double amp, double freq, double phase = 0.0, double offset = 0.0) {
    return {Kind::sine, {amp, freq, phase, offset}};
  }
  static TimeFunction exponential(double amp, double rate, double offset = 0.0) {
    return {Kind::exponential, {offset, amp, rate}};
  }
  /// offset + sum_j amps[j] exp(-rates[j] t)
  static TimeFunction exponentials(double offset, const std::vector<double>& amps, const std::vector<double>& rates) {
    if (amps.size() != rates.size()) throw InvalidSpec("TimeFunction: amplitude and rate counts differ");
    TimeFunction f{Kind::exponential, {offset}};
    for (std::size_t j = 0; j < amps.size(); ++j) {
      f.params.push_back(amps[j]);
      f.params.push_back(rates[j]);
    }
    return f;
  }

  double param(std::size_t k) const { return k < params.size() ? params[k] : 0.0; }

  /// order-th time derivative at t.
  double eval(double t, int order = 0) const {
    switch (kind) {
      case Kind::constant:
        return order == 0 ? param(0) : 0.0;
      case Kind::poly: {
        double acc = 0.0;
        for (std::size_t k = params.size(); k-- > 0;) {
          if (static_cast<int>(k) < order) break;
          double c = params[k];
          for (int j = 0; j < order; ++j) c *= static_cast<double>(static_cast<int>(k) - j);
          acc += c * std::pow(t, static_cast<double>(static_cast<int>(k) - order));
        }
        return acc;
      }
      case Kind::sine: {
        const double amp = param(0), w = param(1), ph = param(2);
        const double x = w * t + ph;
        const double scale = amp * std::pow(w, order);
        switch (order % 4) {
          case 0: return scale * std::sin(x) + (order == 0 ? param(3) : 0.0);
          case 1: return scale * std::cos(x);
          case 2: return -scale * std::sin(x);
          default: return -scale * std::cos(x);
        }
      }
      case Kind::exponential: {
        double acc = order == 0 ? param(0) : 0.0;
        for (std::size_t j = 1; j + 1 < params.size(); j += 2)
          acc += params[j] * std::pow(-params[j + 1], order) * std::exp(-params[j + 1] * t);
        return acc;
      }
    }
    return 0.0;
  }

  TimeSeries sample(const TimeGrid& g, int order = 0) const {
    return TimeSeries::sample(g, [&](double t) { return eval(t, order); });
  }
};

/// Scalar function on the unit interval:
///   sum_k poly_k x^k + sum_j amp_j cos(freq_j x + phase_j)
struct SpaceFunction {
  struct Wave {
    double amp = 0.0;
    double freq = 0.0;
    double phase = 0.0;
  };
  std::vector<double> poly_coeffs;
  std::vector<Wave> waves;

  static SpaceFunction constant(double c) { return {{c}, {}}; }
  static SpaceFunction poly(std::vector<double> coeffs) { return {std::move(coeffs), {}}; }
  /// c + sum_k cosines[k] cos((k+1) pi x) + sines[k] sin((k+1) pi x)
  static SpaceFunction fourier(double c, const std::vector<double>& cosines, const std::vector<double>& sines = {}) {
    SpaceFunction f{{c}, {}};
    for (std::size_t k = 0; k < cosines.size(); ++k)
      f.waves.push_back({cosines[k], std::numbers::pi * static_cast<double>(k + 1), 0.0});
    for (std::size_t k = 0; k < sines.size(); ++k)
      f.waves.push_back({sines[k], std::numbers::pi * static_cast<double>(k + 1), -0.5 * std::numbers::pi});
    return f;
  }
  /// x^2 (1 - x)^2, vanishing with its first derivative at both endpoints.
  static SpaceFunction bump(double scale = 1.0) { return poly({0.0, 0.0, scale, -2.0 * scale, scale}); }

  SpaceFunction& add(const SpaceFunction& other) {
    if (poly_coeffs.size() < other.poly_coeffs.size()) poly_coeffs.resize(other.poly_coeffs.size(), 0.0);
    for (std::size_t k = 0; k < other.poly_coeffs.size(); ++k) poly_coeffs[k] += other.poly_coeffs[k];
    waves.insert(waves.end(), other.waves.begin(), other.waves.end());
    return *this;
  }

  SpaceFunction scaled(double factor) const {
    SpaceFunction f = *this;
    for (double& c : f.poly_coeffs) c *= factor;
    for (auto& w : f.waves) w.amp *= factor;
    return f;
  }

  double eval(double x, int order = 0) const {
    double acc = 0.0;
    for (std::size_t k = poly_coeffs.size(); k-- > 0;) {
      if (static_cast<int>(k) < order) break;
      double c = poly_coeffs[k];
      for (int j = 0; j < order; ++j) c *= static_cast<double>(static_cast<int>(k) - j);
      acc += c * std::pow(x, static_cast<double>(static_cast<int>(k) - order));
    }
    for (const auto& w : waves)
      acc += w.amp * std::pow(w.freq, order) * std::cos(w.freq * x + w.phase + 0.5 * std::numbers::pi * order);
    return acc;
  }

  SpaceField sample(const SpaceGrid& g, int order = 0) const {
    return SpaceField::sample(g, [&](double x) { return eval(x, order); });
  }
};

/// f(t, x) = sum_j T_j(t) X_j(x); empty means zero.
struct SourceFunction {
  struct Term {
    TimeFunction time;
    SpaceFunction space;
  };
  std::vector<Term> terms;

  double eval(double t, double x, int time_order = 0) const {
    double acc = 0.0;
    for (const auto& term : terms) acc += term.time.eval(t, time_order) * term.space.eval(x);
    return acc;
  }

  SpaceTimeField sample(const TimeGrid& tg, const SpaceGrid& sg, int time_order = 0) const {
    return SpaceTimeField::sample(tg, sg, [&](double t, double x) { return eval(t, x, time_order); });
  }
};

inline BoundarySeries sample(const BoundaryPair<TimeFunction>& f, const TimeGrid& g, int order = 0) {
  return {f.left.sample(g, order), f.right.sample(g, order)};
}

}  // namespace thermemo
