#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "thermemo/feedback.hpp"
#include "thermemo/functions.hpp"

using namespace thermemo;

namespace {

ThermostatParams constant_params(const TimeGrid& tg, double eps, double phi0, double uc, double ua, double ub) {
  const TimeSeries zero(tg);
  return {eps,
          phi0,
          TimeSeries::constant(tg, uc),
          {TimeSeries::constant(tg, ua), TimeSeries::constant(tg, ua)},
          {TimeSeries::constant(tg, ub), TimeSeries::constant(tg, ub)},
          {zero, zero},
          {zero, zero}};
}

// Time-varying thermostat data with analytic derivatives.
ThermostatParams varying_params(const TimeGrid& tg) {
  const TimeFunction ua = TimeFunction::sine(0.4, 2.0, 0.1, -0.5);
  const TimeFunction ub = TimeFunction::poly({2.0, 0.3, -0.2});
  return {0.4,
          0.7,
          TimeFunction::sine(0.2, 3.0).sample(tg),
          {ua.sample(tg), ua.sample(tg)},
          {ub.sample(tg), TimeFunction::constant(1.5).sample(tg)},
          {ua.sample(tg, 1), ua.sample(tg, 1)},
          {ub.sample(tg, 1), TimeSeries(tg)}};
}

MeasurementWeights weights(const SpaceGrid& sg) {
  return {SpaceFunction::bump().sample(sg), SpaceField::sample(sg, [](double x) { return 1.0 + x; }), 0.1, 0.05};
}

SpaceTimeField random_field(const TimeGrid& tg, const SpaceGrid& sg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  return SpaceTimeField::sample(tg, sg, [&](double, double) { return d(rng); });
}

}  // namespace

TEST(E1, Examples) {
  const TimeGrid tg(1.0, 10);
  EXPECT_DOUBLE_EQ(e1_series(constant_params(tg, 1.0, 0, 0, 0, 0), tg)[0], 1.0);
  EXPECT_DOUBLE_EQ(e1_series(constant_params(tg, 2.0, 0, 0, 0, 0), tg)[0], 0.5);
  EXPECT_NEAR(e1_series(constant_params(tg, 1.0, 0, 0, 0, 0), tg).back(), std::exp(-1.0), 1e-15);
}

TEST(E0, Examples) {
  const TimeGrid tg(1.0, 1000);
  const auto unforced = e0_series(constant_params(tg, 1.0, 0.0, 0.0, 1.0, 0.8), tg);
  const auto no_ua = e0_series(constant_params(tg, 1.0, 0.5, 1.0, 0.0, 0.8), tg);
  for (std::size_t n = 0; n < tg.size(); ++n) {
    EXPECT_EQ(unforced.left[n], 0.8);
    EXPECT_EQ(no_ua.right[n], 0.8);
  }
  const auto e0 = e0_series(constant_params(tg, 1.0, 0.0, 1.0, 1.0, 0.0), tg);
  EXPECT_NEAR(e0.left.back(), 1.0 - std::exp(-1.0), 1e-5);
}

TEST(Thermostat, ClosedForms) {
  const TimeGrid tg(1.0, 1000);
  const ThermostatParams decay = constant_params(tg, 0.5, 2.0, 0.0, 1.0, 0.0);
  const TimeSeries phi = thermostat_ode_solve(decay, TimeSeries(tg));
  for (std::size_t n = 0; n < tg.size(); ++n) EXPECT_NEAR(phi[n], 2.0 * std::exp(-tg.node(n) / 0.5), 1e-14);
  const ThermostatParams forced = constant_params(tg, 1.0, 0.0, 0.25, 1.0, 0.0);
  const TimeSeries phi2 = thermostat_ode_solve(forced, TimeSeries::constant(tg, 0.75));
  for (std::size_t n = 0; n < tg.size(); ++n) EXPECT_NEAR(phi2[n], 1.0 - std::exp(-tg.node(n)), 1e-6);
}

TEST(Thermostat, OdeResidualVanishesWithDt) {
  auto residual = [](std::size_t steps) {
    const TimeGrid tg(1.0, steps);
    const ThermostatParams p = varying_params(tg);
    const TimeSeries w = TimeSeries::sample(tg, [](double t) { return std::cos(4.0 * t); });
    const TimeSeries phi = thermostat_ode_solve(p, w);
    double worst = 0.0;
    for (std::size_t n = 1; n < steps; ++n) {
      const double dphi = (phi[n + 1] - phi[n - 1]) / (2.0 * tg.dt());
      worst = std::max(worst, std::abs(p.epsilon * dphi + phi[n] - w[n] - p.u_c[n]));
    }
    return worst;
  };
  const double r100 = residual(100), r200 = residual(200);
  EXPECT_LE(r100, 1.0 / 100.0);
  EXPECT_GE(r100 / r200, 1.8);
}

TEST(Thermostat, ConvolutionDerivativeIdentity) {
  // (r - E1 * r)/eps against a centered difference of E1 * r
  auto gap = [](std::size_t steps) {
    const TimeGrid tg(1.0, steps);
    const ThermostatParams p = constant_params(tg, 0.3, 0.0, 0.0, 1.0, 0.0);
    const TimeSeries r = TimeSeries::sample(tg, [](double t) { return std::sin(5.0 * t) + t; });
    const TimeSeries e1r = convolve(e1_series(p, tg), r);
    double worst = 0.0;
    for (std::size_t n = 1; n < steps; ++n)
      worst = std::max(worst,
                       std::abs((r[n] - e1r[n]) / p.epsilon - (e1r[n + 1] - e1r[n - 1]) / (2.0 * tg.dt())));
    return worst;
  };
  EXPECT_GE(gap(100) / gap(200), 1.8);
}

TEST(RvSeries, Examples) {
  const TimeGrid tg(1.0, 50);
  const SpaceGrid sg(20);
  const MeasurementWeights w = weights(sg);
  const SpaceField u0 = SpaceField::sample(sg, [](double x) { return 1.0 + x * x; });
  const double m0 = measure_M(w, u0.values(), sg.dx());
  const TimeSeries frozen = rv_series(PlaySpec{1e6, m0}, w, u0, SpaceTimeField(tg, sg));
  for (std::size_t n = 0; n < tg.size(); ++n) EXPECT_EQ(frozen[n], m0);

  std::mt19937_64 rng(1);
  const SpaceTimeField v = random_field(tg, sg, rng);
  const TimeSeries id = rv_series(ScaledIdentitySpec{1.0, m0}, w, u0, v);
  TimeSeries mv(tg);
  for (std::size_t n = 0; n < tg.size(); ++n) mv[n] = measure_M(w, v.row(n), sg.dx());
  const TimeSeries expected = antiderivative(mv);
  for (std::size_t n = 0; n < tg.size(); ++n) EXPECT_NEAR(id[n], m0 + expected[n], 1e-13);
}

TEST(RvSeries, PlayWithRampInput) {
  // v = 1 with omega1 = 1 and no boundary sensors gives M(u0 + t) = t for u0 = 0
  const TimeGrid tg(1.0, 100);
  const SpaceGrid sg(10);
  const MeasurementWeights w{SpaceFunction::bump().sample(sg), SpaceField::constant(sg, 1.0), 0.0, 0.0};
  const TimeSeries r =
      rv_series(PlaySpec{0.25, 0.0}, w, SpaceField(sg), SpaceTimeField::sample(tg, sg, [](double, double) { return 1.0; }));
  for (std::size_t n = 0; n < tg.size(); ++n) EXPECT_NEAR(r[n], std::max(0.0, tg.node(n) - 0.25), 1e-13);
}

TEST(PsiEval, DecoupledFeedbackGivesZero) {
  const TimeGrid tg(1.0, 40);
  const SpaceGrid sg(10);
  std::mt19937_64 rng(2);
  const auto psi = psi_eval(constant_params(tg, 0.5, 0.3, 0.2, 0.0, 1.7), PlaySpec{0.1, 0.0}, weights(sg),
                            SpaceField(sg), random_field(tg, sg, rng));
  for (std::size_t n = 0; n < tg.size(); ++n) {
    EXPECT_EQ(psi.left[n], 0.0);
    EXPECT_EQ(psi.right[n], 0.0);
  }
}

TEST(PsiEval, FrozenOperatorClosedForm) {
  const TimeGrid tg(1.0, 400);
  const SpaceGrid sg(10);
  std::mt19937_64 rng(3);
  const double c = 1.3, eps = 0.5;
  const auto psi = psi_eval(constant_params(tg, eps, 0.0, 0.0, 1.0, 0.0), ScaledIdentitySpec{0.0, c}, weights(sg),
                            SpaceField(sg), random_field(tg, sg, rng));
  for (std::size_t n = 0; n < tg.size(); ++n)
    EXPECT_NEAR(psi.left[n], c / eps * std::exp(-tg.node(n) / eps), 1e-4);
}

TEST(PsiEval, MatchesDerivativeOfExternalTemperature) {
  // Psi(v) is the time derivative of u_e along u = u0 + 1 * v
  const TimeGrid tg(1.0, 800);
  const SpaceGrid sg(10);
  const ThermostatParams p = varying_params(tg);
  const MeasurementWeights w = weights(sg);
  const SpaceField u0 = SpaceField::sample(sg, [](double x) { return 1.0 + 0.5 * x; });
  const SpaceTimeField v = SpaceTimeField::sample(tg, sg, [](double t, double x) { return std::cos(3.0 * t) * (1.0 + x); });
  SpaceTimeField u = antiderivative(v);
  for (std::size_t n = 0; n < tg.size(); ++n)
    for (std::size_t i = 0; i < sg.size(); ++i) u.at(n, i) += u0[i];
  const MemoryOperatorSpec spec = ScaledIdentitySpec{0.8, 0.2};
  const auto psi = psi_eval(p, spec, w, u0, v);
  const auto ue = external_temperature(p, spec, w, u);
  const TimeSeries due = numeric_time_derivative(ue.left);
  for (std::size_t n = 1; n < tg.steps(); ++n) EXPECT_NEAR(psi.left[n], due[n], 1e-3);
}

TEST(PsiEval, CausalNodeExact) {
  const TimeGrid tg(1.0, 64);
  const SpaceGrid sg(12);
  const ThermostatParams p = varying_params(tg);
  const MeasurementWeights w = weights(sg);
  const SpaceField u0 = SpaceField::constant(sg, 1.0);
  std::mt19937_64 rng(4);
  for (const MemoryOperatorSpec& spec :
       {MemoryOperatorSpec{PlaySpec{0.05, 1.0}}, MemoryOperatorSpec{PreisachSpec::uniform_grid(0.5, 1.5, 6, 0.3)}})
    for (std::size_t m : {std::size_t{1}, tg.steps() / 4, tg.steps() / 2})
      for (int k = 0; k < 20; ++k) {
        const SpaceTimeField v1 = random_field(tg, sg, rng);
        SpaceTimeField v2 = random_field(tg, sg, rng);
        for (std::size_t n = 0; n < m; ++n) std::copy(v1.row(n).begin(), v1.row(n).end(), v2.row(n).begin());
        const auto a = psi_eval(p, spec, w, u0, v1), b = psi_eval(p, spec, w, u0, v2);
        for (std::size_t n = 0; n < m; ++n) {
          ASSERT_EQ(a.left[n], b.left[n]);
          ASSERT_EQ(a.right[n], b.right[n]);
        }
      }
}

TEST(PsiRestart, ContinuationEqualsTailOfFullEvaluation) {
  const TimeGrid tg(1.0, 60);
  const SpaceGrid sg(8);
  const ThermostatParams p = varying_params(tg);
  const MeasurementWeights w = weights(sg);
  const SpaceField u0 = SpaceField::constant(sg, 1.0);
  std::mt19937_64 rng(5);
  const SpaceTimeField v = random_field(tg, sg, rng);
  const MemoryOperatorSpec spec = PlaySpec{0.02, 1.0};
  const auto full = psi_eval(p, spec, w, u0, v);

  const std::size_t tau = 40, delta = 20;
  SpaceTimeField tail(TimeGrid::with_step(tg.dt(), delta), sg);
  for (std::size_t n = 0; n <= delta; ++n) std::copy(v.row(tau + n).begin(), v.row(tau + n).end(), tail.row(n).begin());
  const auto part = psi_restart(p, spec, w, u0, v.prefix(tau), tail);
  for (std::size_t n = 0; n <= delta; ++n) {
    EXPECT_EQ(part.left[n], full.left[tau + n]);
    EXPECT_EQ(part.right[n], full.right[tau + n]);
  }
}

TEST(PsiRestart, ZeroPrefixMatchesDirectConcatenation) {
  const TimeGrid tg(1.0, 40);
  const SpaceGrid sg(8);
  const ThermostatParams p = varying_params(tg);
  const MeasurementWeights w = weights(sg);
  const SpaceField u0 = SpaceField::constant(sg, 1.0);
  std::mt19937_64 rng(6);
  const std::size_t tau = 15, delta = 25;
  SpaceTimeField tail(TimeGrid::with_step(tg.dt(), delta), sg);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (std::size_t n = 1; n <= delta; ++n)
    for (std::size_t i = 0; i < sg.size(); ++i) tail.at(n, i) = d(rng);
  SpaceTimeField joined(tg, sg);
  for (std::size_t n = 1; n <= delta; ++n) std::copy(tail.row(n).begin(), tail.row(n).end(), joined.row(tau + n).begin());
  const MemoryOperatorSpec spec = ScaledIdentitySpec{0.5, 1.0};
  const auto direct = psi_eval(p, spec, w, u0, joined);
  const auto part = psi_restart(p, spec, w, u0, SpaceTimeField(TimeGrid::with_step(tg.dt(), tau), sg), tail);
  for (std::size_t n = 0; n <= delta; ++n) EXPECT_EQ(part.left[n], direct.left[tau + n]);
}

TEST(PsiRestart, TailsAgreeingInitiallyGiveAgreeingOutputs) {
  const TimeGrid tg(1.0, 40);
  const SpaceGrid sg(8);
  const ThermostatParams p = varying_params(tg);
  const MeasurementWeights w = weights(sg);
  const SpaceField u0 = SpaceField::constant(sg, 1.0);
  std::mt19937_64 rng(7);
  const SpaceTimeField v = random_field(tg, sg, rng);
  const std::size_t tau = 20, delta = 20, agree = 8;
  SpaceTimeField t1(TimeGrid::with_step(tg.dt(), delta), sg), t2(TimeGrid::with_step(tg.dt(), delta), sg);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (std::size_t n = 0; n <= delta; ++n)
    for (std::size_t i = 0; i < sg.size(); ++i) {
      t1.at(n, i) = n == 0 ? v.at(tau, i) : d(rng);
      t2.at(n, i) = n <= agree ? t1.at(n, i) : d(rng);
    }
  const MemoryOperatorSpec spec = PlaySpec{0.05, 1.0};
  const auto a = psi_restart(p, spec, w, u0, v.prefix(tau), t1);
  const auto b = psi_restart(p, spec, w, u0, v.prefix(tau), t2);
  for (std::size_t n = 0; n <= agree; ++n) EXPECT_EQ(a.left[n], b.left[n]);
}

TEST(PsiRestart, RejectsMismatchedJunction) {
  const TimeGrid tg(1.0, 20);
  const SpaceGrid sg(8);
  SpaceTimeField tail(TimeGrid::with_step(tg.dt(), 5), sg);
  tail.at(0, 3) = 1.0;
  EXPECT_THROW(psi_restart(varying_params(tg), PlaySpec{0.1, 0.0}, weights(sg), SpaceField(sg),
                           SpaceTimeField(TimeGrid::with_step(tg.dt(), 10), sg), tail),
               InvalidSpec);
}

TEST(ExternalTemperature, MatchesThermostatSolve) {
  const TimeGrid tg(1.0, 200);
  const SpaceGrid sg(16);
  const ThermostatParams p = varying_params(tg);
  const MeasurementWeights w = weights(sg);
  const SpaceTimeField u =
      SpaceTimeField::sample(tg, sg, [](double t, double x) { return 1.0 + std::sin(2.0 * t) * std::cos(x); });
  for (const MemoryOperatorSpec& spec : {MemoryOperatorSpec{PlaySpec{0.1, 1.5}},
                                         MemoryOperatorSpec{PreisachSpec::uniform_grid(1.0, 2.0, 5, 0.4)},
                                         MemoryOperatorSpec{ScaledIdentitySpec{2.0, 0.0}}}) {
    TimeSeries m(tg);
    for (std::size_t n = 0; n < tg.size(); ++n) m[n] = measure_M(w, u.row(n), sg.dx());
    const TimeSeries phi = thermostat_ode_solve(p, w_apply(spec, m));
    const auto ue = external_temperature(p, spec, w, u);
    for (std::size_t n = 0; n < tg.size(); ++n) {
      EXPECT_NEAR(ue.left[n], phi[n] * p.u_a.left[n] + p.u_b.left[n], 1e-10);
      EXPECT_NEAR(ue.right[n], phi[n] * p.u_a.right[n] + p.u_b.right[n], 1e-10);
    }
  }
}

TEST(PsiEval, LipschitzRatioDoesNotGrowOnShorterWindows) {
  // ratio ||Psi(v1) - Psi(v2)|| / ||v1 - v2|| on [0, tau] and on [0, tau/4]
  const SpaceGrid sg(10);
  const MeasurementWeights w = weights(sg);
  const SpaceField u0 = SpaceField::constant(sg, 1.0);
  auto ratio = [&](double tau) {
    const TimeGrid tg(tau, 80);
    const ThermostatParams p = varying_params(tg);
    const SpaceTimeField v1 = SpaceTimeField::sample(tg, sg, [](double t, double x) { return std::sin(3 * t + x); });
    const SpaceTimeField v2 = SpaceTimeField::sample(tg, sg, [](double t, double x) { return std::cos(2 * t) * x; });
    const MemoryOperatorSpec spec = ScaledIdentitySpec{1.0, 0.0};
    const auto a = psi_eval(p, spec, w, u0, v1), b = psi_eval(p, spec, w, u0, v2);
    SpaceTimeField dv(tg, sg);
    for (std::size_t n = 0; n < tg.size(); ++n)
      for (std::size_t i = 0; i < sg.size(); ++i) dv.at(n, i) = v1.at(n, i) - v2.at(n, i);
    const double num = std::hypot(l2_time(a.left - b.left), l2_time(a.right - b.right));
    return num / l2_space_time(dv);
  };
  EXPECT_LE(ratio(0.25), 1.2 * ratio(1.0));
}
