#pragma once

// Self-check battery run by `thermemo verify`. Each check compares library
// output against a closed form or an independent recomputation and records
// the measured value next to its limit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "thermemo/convolution.hpp"
#include "thermemo/experiment.hpp"
#include "thermemo/feedback.hpp"
#include "thermemo/forward_solver.hpp"
#include "thermemo/grid.hpp"
#include "thermemo/hysteresis.hpp"
#include "thermemo/inverse_solver.hpp"
#include "thermemo/pde_ops.hpp"
#include "thermemo/scenario.hpp"

namespace thermemo {

struct CheckResult {
  std::string suite;
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool passed = false;
  std::string error;  // set when the check threw
};

namespace verify_detail {

using Rng = std::mt19937_64;

inline TimeSeries random_series(const TimeGrid& g, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  TimeSeries s(g);
  for (std::size_t n = 0; n < s.size(); ++n) s[n] = d(rng);
  return s;
}

/// Random walk with bounded increments: a piecewise-linear path with many corners.
inline TimeSeries random_path(const TimeGrid& g, Rng& rng, double step = 0.2) {
  std::uniform_real_distribution<double> d(-step, step);
  TimeSeries s(g);
  for (std::size_t n = 1; n < s.size(); ++n) s[n] = s[n - 1] + d(rng);
  return s;
}

inline double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Registers checks of the form value <= limit.
class Battery {
 public:
  void run(const std::string& suite, const std::string& name, double limit, const std::function<double()>& fn) {
    CheckResult r{suite, name, 0.0, limit, false, {}};
    try {
      r.value = fn();
      r.passed = r.value <= limit;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    results_.push_back(std::move(r));
  }

  /// Checks whose pass condition is "throws E".
  template <class E>
  void expect_throw(const std::string& suite, const std::string& name, const std::function<void()>& fn) {
    CheckResult r{suite, name, 0.0, 0.0, false, {}};
    try {
      fn();
      r.error = "no exception";
    } catch (const E&) {
      r.passed = true;
    } catch (const std::exception& e) {
      r.error = std::string("unexpected exception: ") + e.what();
    }
    results_.push_back(std::move(r));
  }

  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  std::vector<CheckResult> results_;
};

inline void grid_checks(Battery& b) {
  b.run("grid", "l2_space(x) = 1/sqrt(3)", 1e-4, [] {
    const SpaceGrid sg(100);
    return std::abs(l2_space(SpaceField::sample(sg, [](double x) { return x; })) - 1.0 / std::sqrt(3.0));
  });
  b.run("grid", "antiderivative(cos)(1) = sin 1", 1e-6, [] {
    const TimeGrid tg(1.0, 1000);
    return std::abs(antiderivative(TimeSeries::sample(tg, [](double t) { return std::cos(t); })).back() - std::sin(1.0));
  });
  b.run("grid", "l1_time(t) on [0,1] = 1/2", 1e-12, [] {
    const TimeGrid tg(1.0, 200);
    return std::abs(l1_time(TimeSeries::sample(tg, [](double t) { return t; })) - 0.5);
  });
}

inline void convolution_checks(Battery& b) {
  b.run("convolution", "exp(-t) * 1 at t = 1", 1e-5, [] {
    const TimeGrid tg(1.0, 1000);
    const TimeSeries h = TimeSeries::sample(tg, [](double t) { return std::exp(-t); });
    return std::abs(convolve(h, TimeSeries::constant(tg, 1.0)).back() - (1.0 - std::exp(-1.0)));
  });
  b.run("convolution", "commutativity, 20 random pairs", 1e-12, [] {
    Rng rng(11);
    const TimeGrid tg(1.0, 128);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const TimeSeries h = random_series(tg, rng), f = random_series(tg, rng);
      worst = std::max(worst, max_diff(convolve(h, f).values(), convolve(f, h).values()));
    }
    return worst;
  });
  b.run("convolution", "Young ratio l2(h*f)/(l1(h) l2(f)), 100 pairs", 1.01, [] {
    Rng rng(12);
    const TimeGrid tg(1.0, 256);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const TimeSeries h = random_series(tg, rng), f = random_series(tg, rng);
      worst = std::max(worst, l2_time(convolve(h, f)) / (l1_time(h) * l2_time(f)));
    }
    return worst;
  });
  b.run("convolution", "splitting identities at m = 40, N = 64", 1e-12, [] {
    Rng rng(13);
    const TimeGrid tg(1.0, 64);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const TimeSeries h = random_series(tg, rng), z = random_series(tg, rng);
      const TimeSeries full = convolve(h, z);
      const auto s = split_convolution(h, z, 40);
      for (std::size_t n = 0; n <= 40; ++n) worst = std::max(worst, std::abs(s.left[n] - full[n]));
      for (std::size_t n = 0; n <= 24; ++n) worst = std::max(worst, std::abs(s.right[n] - full[40 + n]));
    }
    return worst;
  });
  b.run("convolution", "Volterra node residual", 1e-14, [] {
    Rng rng(14);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const double a = d(rng), w = 0.5 * std::abs(d(rng)), rhs = d(rng);
      const double h = volterra2_solve_node(a, rhs, w);
      worst = std::max(worst, std::abs(h - rhs + w * a * h));
    }
    return worst;
  });
}

inline void hysteresis_checks(Battery& b) {
  const std::vector<MemoryOperatorSpec> specs{PlaySpec{0.25, 0.0}, PreisachSpec::uniform_grid(-1.0, 1.0, 9, 1.0),
                                              ScaledIdentitySpec{0.7, 0.3}};
  b.run("hysteresis", "play ramp r = 0.25", 1e-14, [] {
    const TimeGrid tg(1.0, 100);
    const TimeSeries w = w_apply(PlaySpec{0.25, 0.0}, TimeSeries::sample(tg, [](double t) { return t; }));
    double worst = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) worst = std::max(worst, std::abs(w[n] - std::max(0.0, tg.node(n) - 0.25)));
    return worst;
  });
  b.run("hysteresis", "prefix restriction, 100 inputs per kind", 0.0, [&] {
    Rng rng(21);
    const TimeGrid tg(1.0, 200);
    double worst = 0.0;
    for (const auto& spec : specs)
      for (int k = 0; k < 100; ++k) {
        const TimeSeries x = random_path(tg, rng);
        const std::size_t m = std::uniform_int_distribution<std::size_t>(0, tg.steps())(rng);
        const TimeSeries full = w_apply(spec, x);
        const TimeSeries part = w_apply_prefix(spec, x, m);
        for (std::size_t n = 0; n <= m; ++n) worst = std::max(worst, std::abs(full[n] - part[n]));
      }
    return worst;
  });
  b.run("hysteresis", "Lipschitz excess over declared L, 1000 pairs per kind", 1e-12, [&] {
    Rng rng(22);
    const TimeGrid tg(1.0, 100);
    double worst = -HUGE_VAL;
    for (const auto& spec : specs) {
      const double lip = declared_lipschitz(spec);
      const auto* pre = std::get_if<PreisachSpec>(&spec);
      for (int k = 0; k < 1000; ++k) {
        const TimeSeries x1 = random_path(tg, rng);
        TimeSeries x2 = random_path(tg, rng);
        if (pre) {
          // keep pairs at least one threshold gap apart
          double d = 0.0;
          for (std::size_t n = 0; n < x1.size(); ++n) d = std::max(d, std::abs(x1[n] - x2[n]));
          if (d < pre->resolution()) continue;
        }
        worst = std::max(worst, lipschitz_probe(spec, x1, x2) - lip);
      }
    }
    return worst;
  });
  b.run("hysteresis", "rate independence at corners", 1e-12, [&] {
    Rng rng(23);
    std::uniform_int_distribution<int> sub(1, 6);
    double worst = 0.0;
    for (const auto& spec : specs) {
      if (std::holds_alternative<ScaledIdentitySpec>(spec)) continue;
      for (int k = 0; k < 50; ++k) {
        const TimeSeries corners = random_path(TimeGrid(1.0, 40), rng, 0.5);
        std::vector<double> fine{corners[0]};
        std::vector<std::size_t> at{0};
        for (std::size_t j = 1; j < corners.size(); ++j) {
          const int pieces = sub(rng);
          for (int s = 1; s <= pieces; ++s)
            fine.push_back(corners[j - 1] + (corners[j] - corners[j - 1]) * s / pieces);
          at.push_back(fine.size() - 1);
        }
        TimeSeries slow(TimeGrid(1.0, fine.size() - 1));
        std::copy(fine.begin(), fine.end(), slow.values().begin());
        const TimeSeries w_fast = w_apply(spec, corners);
        const TimeSeries w_slow = w_apply(spec, slow);
        for (std::size_t j = 0; j < corners.size(); ++j) worst = std::max(worst, std::abs(w_fast[j] - w_slow[at[j]]));
      }
    }
    return worst;
  });
}

inline void pde_checks(Battery& b) {
  b.run("pde_ops", "A x^2 = 2 with a = 1", 1e-9, [] {
    const SpaceGrid sg(50);
    const Coefficients c{SpaceField::constant(sg, 1.0), -1.0, 1.0, 0.0, 0.0};
    const SpaceField au = apply_A(c, SpaceField::sample(sg, [](double x) { return x * x; }));
    double worst = 0.0;
    for (double v : au.values()) worst = std::max(worst, std::abs(v - 2.0));
    return worst;
  });
  b.run("pde_ops", "2 u'(1) + u(1) = 5 for u = x^2", 1e-10, [] {
    const SpaceGrid sg(50);
    const Coefficients c{SpaceField::constant(sg, 1.0), 2.0, 2.0, 1.0, 1.0};
    return std::abs(apply_B(c, SpaceField::sample(sg, [](double x) { return x * x; })).right - 5.0);
  });
  b.run("pde_ops", "Phi(1) = 1/30 for the quartic bump", 1e-5, [] {
    const SpaceGrid sg(100);
    const MeasurementWeights w{SpaceFunction::bump().sample(sg), SpaceField::constant(sg, 1.0), 0.0, 0.0};
    return std::abs(measure_Phi(w, SpaceField::constant(sg, 1.0)) - 1.0 / 30.0);
  });
  b.run("pde_ops", "Green identity with boundary terms, v = 1 + x", 1e-3, [] {
    const SpaceGrid sg(100);
    const Coefficients c{SpaceField::constant(sg, 1.0), -1.0, 1.0, 0.0, 0.0};
    const MeasurementWeights w{SpaceFunction::bump().sample(sg), SpaceField::constant(sg, 1.0), 0.0, 0.0};
    return adjoint_residual(c, w, SpaceField::sample(sg, [](double x) { return 1.0 + x; }));
  });
}

inline void feedback_checks(Battery& b) {
  auto params = [](const TimeGrid& tg, double eps, double phi0, double uc, double ua, double ub) {
    const TimeSeries zero(tg);
    return ThermostatParams{eps,
                            phi0,
                            TimeSeries::constant(tg, uc),
                            {TimeSeries::constant(tg, ua), TimeSeries::constant(tg, ua)},
                            {TimeSeries::constant(tg, ub), TimeSeries::constant(tg, ub)},
                            {zero, zero},
                            {zero, zero}};
  };
  b.run("feedback", "E0 = 1 - exp(-t) at t = 1", 1e-5, [&] {
    const TimeGrid tg(1.0, 1000);
    return std::abs(e0_series(params(tg, 1.0, 0.0, 1.0, 1.0, 0.0), tg).left.back() - (1.0 - std::exp(-1.0)));
  });
  b.run("feedback", "thermostat residual eps phi' + phi - w - u_C", 2e-3, [&] {
    const TimeGrid tg(1.0, 400);
    const ThermostatParams p = params(tg, 0.5, 0.3, 0.2, 1.0, 0.0);
    const TimeSeries w = TimeSeries::sample(tg, [](double t) { return std::sin(3.0 * t); });
    const TimeSeries phi = thermostat_ode_solve(p, w);
    double worst = 0.0;
    for (std::size_t n = 1; n < tg.steps(); ++n) {
      const double dphi = (phi[n + 1] - phi[n - 1]) / (2.0 * tg.dt());
      worst = std::max(worst, std::abs(p.epsilon * dphi + phi[n] - w[n] - p.u_c[n]));
    }
    return worst;
  });
  b.run("feedback", "Psi of a frozen operator = (c/eps) exp(-t/eps)", 1e-4, [&] {
    const TimeGrid tg(1.0, 200);
    const SpaceGrid sg(20);
    const ThermostatParams p = params(tg, 0.5, 0.0, 0.0, 1.0, 0.0);
    const MeasurementWeights w{SpaceFunction::bump().sample(sg), SpaceField::constant(sg, 1.0), 0.0, 0.0};
    const SpaceField u0 = SpaceField::constant(sg, 1.0);
    const auto psi = psi_eval(p, ScaledIdentitySpec{0.0, 2.0}, w, u0, SpaceTimeField(tg, sg));
    double worst = 0.0;
    for (std::size_t n = 0; n < tg.size(); ++n)
      worst = std::max(worst, std::abs(psi.left[n] - 4.0 * std::exp(-2.0 * tg.node(n))));
    return worst;
  });
  b.run("feedback", "Psi causality, 20 pairs, m in {1, N/4, N/2}", 0.0, [&] {
    Rng rng(31);
    const TimeGrid tg(1.0, 64);
    const SpaceGrid sg(16);
    ThermostatParams p = params(tg, 0.5, 0.2, 0.1, -0.5, 2.0);
    const MeasurementWeights w{SpaceFunction::bump().sample(sg), SpaceField::constant(sg, 1.0), 0.1, 0.2};
    const SpaceField u0 = SpaceField::constant(sg, 1.0);
    double worst = 0.0;
    for (std::size_t m : {std::size_t{1}, tg.steps() / 4, tg.steps() / 2})
      for (int k = 0; k < 20; ++k) {
        SpaceTimeField v1(tg, sg), v2(tg, sg);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        for (std::size_t n = 0; n < tg.size(); ++n)
          for (std::size_t i = 0; i < sg.size(); ++i) {
            v1.at(n, i) = d(rng);
            v2.at(n, i) = n < m ? v1.at(n, i) : d(rng);
          }
        const MemoryOperatorSpec spec = PlaySpec{0.05, 1.0};
        const auto a = psi_eval(p, spec, w, u0, v1);
        const auto c = psi_eval(p, spec, w, u0, v2);
        for (std::size_t n = 0; n < m; ++n)
          worst = std::max({worst, std::abs(a.left[n] - c.left[n]), std::abs(a.right[n] - c.right[n])});
      }
    return worst;
  });
}

inline void solver_checks(Battery& b) {
  b.run("forward_solver", "manufactured solution max error, N = 400, M = 100", 5e-3, [] {
    const Scenario s = presets::manufactured();
    const TimeGrid tg(s.t_end, 400);
    const SpaceGrid sg(100);
    const auto r = forward_solve(make_forward_problem(s, tg, sg));
    double worst = 0.0;
    for (std::size_t n = 0; n < tg.size(); ++n)
      for (std::size_t i = 0; i < sg.size(); ++i)
        worst = std::max(worst, std::abs(r.u.at(n, i) - s.exact_u(tg.node(n), sg.node(i))));
    return worst;
  });
  b.run("forward_solver", "dissipative preset: largest l2 increase", 0.0, [] {
    const Scenario s = presets::dissipative();
    const TimeGrid tg(s.t_end, 200);
    const SpaceGrid sg(50);
    const auto r = forward_solve(make_forward_problem(s, tg, sg));
    double worst = 0.0;
    for (std::size_t n = 1; n < tg.size(); ++n)
      worst = std::max(worst, l2_space(r.u.snapshot(n)) - l2_space(r.u.snapshot(n - 1)));
    return worst;
  });
  b.run("inverse_solver", "smooth_diff(t^2, 2) interior", 1e-8, [] {
    const TimeGrid tg(1.0, 100);
    const TimeSeries d2 = smooth_diff(TimeSeries::sample(tg, [](double t) { return t * t; }), 2, 3);
    double worst = 0.0;
    for (std::size_t n = 1; n < tg.steps(); ++n) worst = std::max(worst, std::abs(d2[n] - 2.0));
    return worst;
  });
  b.run("inverse_solver", "exp_kernel round trip, relative l2 error of h", 5e-2, [] {
    RoundTripSettings rt;
    return run_roundtrip(presets::exp_kernel(), rt).rel_l2_h;
  });
  b.run("inverse_solver", "kernel equation residual after the march", 1e-10, [] {
    RoundTripSettings rt;
    rt.steps = 100;
    rt.cells = 25;
    return run_roundtrip(presets::exp_kernel(), rt).inverse.report.metrics.at("kernel_equation_residual");
  });
  b.expect_throw<ChiSingular>("inverse_solver", "Phi(A u0) = 0 raises ChiSingular", [] {
    RoundTripSettings rt;
    rt.steps = 50;
    rt.cells = 20;
    run_roundtrip(presets::chi_singular(), rt);
  });
  b.expect_throw<CompatibilityViolation>("inverse_solver", "strict mode rejects inconsistent q(0)", [] {
    RoundTripSettings rt;
    rt.controls.strict = true;
    run_roundtrip(presets::incompatible_boundary(), rt);
  });
}

}  // namespace verify_detail

/// Runs every self-check; callers report failures.
inline std::vector<CheckResult> run_verify_battery() {
  verify_detail::Battery b;
  verify_detail::grid_checks(b);
  verify_detail::convolution_checks(b);
  verify_detail::hysteresis_checks(b);
  verify_detail::pde_checks(b);
  verify_detail::feedback_checks(b);
  verify_detail::solver_checks(b);
  return b.take();
}

}  // namespace thermemo
