#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "thermemo/experiment.hpp"
#include "thermemo/inverse_solver.hpp"
#include "thermemo/scenario.hpp"

using namespace thermemo;

namespace {

RoundTripSettings coarse() {
  RoundTripSettings rt;
  rt.steps = 200;
  rt.cells = 50;
  return rt;
}

const RoundTripResult& exp_roundtrip() {
  static const RoundTripResult r = run_roundtrip(presets::exp_kernel(), coarse());
  return r;
}

double compatibility_tolerance(const InverseProblem& p) {
  const double dt = p.tgrid.dt(), dx = p.sgrid.dx();
  return 10.0 * (dt + dx * dx) * (1.0 + max_abs(p.u0.values()) + max_abs(p.g.values()));
}

SpaceTimeField scaled(const SpaceTimeField& f, double a) {
  SpaceTimeField out = f;
  for (std::size_t n = 0; n < out.rows(); ++n)
    for (std::size_t i = 0; i < out.cols(); ++i) out.at(n, i) *= a;
  return out;
}

}  // namespace

TEST(SmoothDiff, ExactOnQuadratics) {
  const TimeGrid tg(1.0, 50);
  const TimeSeries g = TimeSeries::sample(tg, [](double t) { return 3.0 * t * t - t + 2.0; });
  for (std::size_t w : {1u, 3u, 10u}) {
    const TimeSeries d1 = smooth_diff(g, 1, w), d2 = smooth_diff(g, 2, w);
    for (std::size_t n = 0; n < tg.size(); ++n) {
      EXPECT_NEAR(d1[n], 6.0 * tg.node(n) - 1.0, 1e-8);
      EXPECT_NEAR(d2[n], 6.0, 1e-8);
    }
  }
}

TEST(SmoothDiff, SineFirstDerivative) {
  const TimeGrid tg(1.0, 1000);
  const TimeSeries d = smooth_diff(TimeSeries::sample(tg, [](double t) { return std::sin(t); }), 1, 1);
  for (std::size_t n = 0; n < tg.size(); ++n) EXPECT_NEAR(d[n], std::cos(tg.node(n)), 1e-5);
}

TEST(SmoothDiff, WindowSuppressesNoise) {
  const TimeGrid tg(2.0, 200);
  const TimeSeries g = inject_noise(TimeSeries::sample(tg, [](double t) { return std::sin(t); }), 1e-4, 11);
  const TimeSeries d2 = smooth_diff(g, 2, 21);
  const TimeSeries raw = smooth_diff(g, 2, 1);
  double smooth_err = 0.0, raw_err = 0.0;
  for (std::size_t n = 21; n + 21 < tg.size(); ++n) {
    smooth_err = std::max(smooth_err, std::abs(d2[n] + std::sin(tg.node(n))));
    raw_err = std::max(raw_err, std::abs(raw[n] + std::sin(tg.node(n))));
  }
  EXPECT_LE(smooth_err, 2e-2);
  EXPECT_GT(raw_err, 10.0 * smooth_err);
}

TEST(SmoothDiff, RejectsBadArguments) {
  const TimeSeries g(TimeGrid(1.0, 10));
  EXPECT_THROW(smooth_diff(g, 3, 1), InvalidSpec);
  EXPECT_THROW(smooth_diff(g, 1, 0), InvalidSpec);
  EXPECT_THROW(smooth_diff(g, 1, 6), InvalidSpec);
}

TEST(Compatibility, ConsistentPresetPasses) {
  const InverseProblem& p = exp_roundtrip().problem;
  const auto res = check_compatibility(p);
  ASSERT_EQ(res.size(), 5u);
  const double tol = compatibility_tolerance(p);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_LE(res[k].residual, tol) << res[k].condition;
  EXPECT_GT(res[4].residual, 1.0);
}

TEST(Compatibility, ShiftedBoundaryHistoryIsFlagged) {
  const Scenario s = presets::incompatible_boundary();
  const TimeGrid tg(s.t_end, 200);
  const SpaceGrid sg(50);
  const TimeSeries g = emit_measurement(forward_solve(make_forward_problem(s, tg, sg)).u, sample_weights(s, sg));
  const InverseProblem p = make_inverse_problem(s, sg, g);
  const auto res = check_compatibility(p);
  EXPECT_NEAR(res[2].residual, 1.0, 1e-2);
  EXPECT_NEAR(res[3].residual, 1.0, 1e-2);

  SolverControls strict;
  strict.strict = true;
  const InverseCoefficients c = assemble_coefficients(p);
  EXPECT_THROW(inverse_march(p, c, strict), CompatibilityViolation);
  const InverseResult lenient = inverse_march(p, c);
  EXPECT_FALSE(lenient.report.warnings.empty());
}

TEST(Assemble, SingularChiIsRejected) {
  const Scenario s = presets::chi_singular();
  const SpaceGrid sg(50);
  const InverseProblem p = make_inverse_problem(s, sg, TimeSeries(TimeGrid(1.0, 100)));
  EXPECT_THROW(assemble_coefficients(p), ChiSingular);
}

TEST(Assemble, ZeroDataGivesZeroSources) {
  InverseProblem p = exp_roundtrip().problem;
  p.g = TimeSeries(p.tgrid);
  p.f = SpaceTimeField(p.tgrid, p.sgrid);
  p.df = p.f;
  p.dq = {TimeSeries(p.tgrid), TimeSeries(p.tgrid)};
  const InverseCoefficients c = assemble_coefficients(p);
  for (std::size_t n = 0; n < p.tgrid.size(); ++n) {
    EXPECT_EQ(c.h_star[n], 0.0);
    EXPECT_EQ(c.v_star_gamma.left[n], 0.0);
  }
  for (double v : c.v_star.values()) EXPECT_EQ(v, 0.0);
}

TEST(Assemble, ChiScalesInverselyWithOmega) {
  InverseProblem p = exp_roundtrip().problem;
  const double chi = assemble_coefficients(p).chi;
  p.weights.omega = 0.5 * p.weights.omega;
  EXPECT_NEAR(assemble_coefficients(p).chi, 2.0 * chi, 1e-12 * std::abs(chi));
}

TEST(Assemble, SourceTermsMatchDefinition) {
  const RoundTripResult& r = exp_roundtrip();
  const InverseProblem& p = r.problem;
  const InverseCoefficients& c = r.coeffs;
  const SpaceField au0 = apply_A(p.coeffs, p.u0);
  EXPECT_NEAR(c.chi * measure_Phi(p.weights, au0), 1.0, 1e-12);
  const TimeSeries g2 = smooth_diff(p.g, 2, 1);
  const auto bu0 = apply_B(p.coeffs, p.u0);
  for (std::size_t n : {0u, 17u, 100u, 200u}) {
    const double hs = c.chi * (g2[n] - measure_Phi(p.weights, p.df.snapshot(n)));
    EXPECT_NEAR(c.h_star[n], hs, 1e-9 * (1.0 + std::abs(hs)));
    for (std::size_t i : {0u, 13u, 50u})
      EXPECT_NEAR(c.v_star.at(n, i), p.df.at(n, i) + c.h_star[n] * au0[i], 1e-9 * (1.0 + std::abs(c.v_star.at(n, i))));
    EXPECT_NEAR(c.v_star_gamma.right[n], -p.dq.right[n] - c.h_star[n] * bu0.right, 1e-9);
  }
  for (std::size_t i = 0; i < p.sgrid.size(); ++i) EXPECT_NEAR(c.v0[i], au0[i] + p.f.at(0, i), 1e-12);
}

TEST(ReconstructU, Examples) {
  const TimeGrid tg(1.0, 20);
  const SpaceGrid sg(8);
  const SpaceField u0 = SpaceField::sample(sg, [](double x) { return 1.0 + x; });
  const SpaceTimeField frozen = reconstruct_u(u0, SpaceTimeField(tg, sg));
  const SpaceTimeField ramp =
      reconstruct_u(u0, SpaceTimeField::sample(tg, sg, [](double, double) { return 1.0; }));
  for (std::size_t n = 0; n < tg.size(); ++n)
    for (std::size_t i = 0; i < sg.size(); ++i) {
      EXPECT_EQ(frozen.at(n, i), u0[i]);
      EXPECT_NEAR(ramp.at(n, i), u0[i] + tg.node(n), 1e-14);
    }
  EXPECT_THROW(reconstruct_u(SpaceField(SpaceGrid(9)), SpaceTimeField(tg, sg)), GridMismatch);
}

TEST(RoundTrip, ExponentialKernel) {
  const RoundTripResult& r = exp_roundtrip();
  EXPECT_LE(r.rel_l2_h, 0.05);
  EXPECT_LE(r.rel_l2_u, 0.01);
  EXPECT_LE(r.inverse.report.metrics.at("kernel_equation_residual"), 1e-10);
}

TEST(RoundTrip, ZeroKernel) {
  const Scenario s = presets::zero_kernel();
  const RoundTripResult r = run_roundtrip(s, RoundTripSettings{});
  EXPECT_LE(r.abs_l2_h, 5e-3 * std::sqrt(s.t_end));
}

TEST(RoundTrip, PreisachKernel) {
  const RoundTripResult r = run_roundtrip(presets::preisach_kernel(), coarse());
  EXPECT_LE(r.rel_l2_h, 0.05);
}

TEST(Residuals, WrongKernelIsDetected) {
  const RoundTripResult& r = exp_roundtrip();
  TimeSeries wrong = r.inverse.h;
  for (std::size_t n = 0; n < wrong.size(); ++n) wrong[n] += 0.1;
  const Problem2Residuals good = r.residuals;
  const Problem2Residuals bad = residual_problem2(r.u, r.inverse.v, wrong, r.problem);
  EXPECT_GE(bad.interior, 10.0 * good.interior);
  EXPECT_EQ(bad.measurement, good.measurement);
}

TEST(Residuals, SmallForTheTrueSolution) {
  const RoundTripResult& r = exp_roundtrip();
  EXPECT_LE(r.residuals.measurement, 1e-3);
  EXPECT_LE(r.residuals.derivative_identity, 1e-2 * l2_space_time(r.inverse.v));
}

TEST(InverseMarch, CausalInTheData) {
  // truncating g only changes the last window of derivative nodes
  const RoundTripResult& r = exp_roundtrip();
  const Scenario s = presets::exp_kernel();
  const std::size_t m = 120;
  const InverseProblem p = make_inverse_problem(s, r.problem.sgrid, r.g.prefix(m));
  const InverseResult part = inverse_march(p, assemble_coefficients(p));
  for (std::size_t n = 0; n + 2 < m; ++n) EXPECT_NEAR(part.h[n], r.inverse.h[n], 1e-9 * (1.0 + std::abs(r.inverse.h[n])));
}

TEST(InverseMarch, FixedPointIterationContracts) {
  for (const auto& name : {"exp_kernel", "preisach_kernel"}) {
    const RoundTripResult r = run_roundtrip(presets::by_name(name), coarse());
    EXPECT_TRUE(r.inverse.report.monotone_after(3)) << name;
    EXPECT_LE(r.inverse.report.max_iterations(), SolverControls{}.max_picard) << name;
  }
}

TEST(InverseMarch, WindowedMatchesStepwise) {
  const RoundTripResult& r = exp_roundtrip();
  SolverControls ctl;
  ctl.window_steps = 8;
  const InverseResult w = inverse_march(r.problem, r.coeffs, ctl);
  EXPECT_EQ(w.report.iterations.size(), 25u);
  for (std::size_t n = 0; n < w.h.size(); ++n) EXPECT_NEAR(w.h[n], r.inverse.h[n], 1e-7 * (1.0 + std::abs(w.h[n])));
}

TEST(InverseMarch, KernelInvariantUnderScalingOfLinearData) {
  // with a linear memory operator the whole problem is linear in (u0, f, q, g, feedback data)
  InverseProblem p = exp_roundtrip().problem;
  p.memory = ScaledIdentitySpec{0.5, 1.0};
  const double alpha = 3.0;
  InverseProblem q = p;
  q.u0 = alpha * p.u0;
  q.f = scaled(p.f, alpha);
  q.df = scaled(p.df, alpha);
  q.q = {alpha * p.q.left, alpha * p.q.right};
  q.dq = {alpha * p.dq.left, alpha * p.dq.right};
  q.g = alpha * p.g;
  q.thermostat.phi0 *= alpha;
  q.thermostat.u_c = alpha * p.thermostat.u_c;
  q.thermostat.u_b = {alpha * p.thermostat.u_b.left, alpha * p.thermostat.u_b.right};
  q.thermostat.du_b = {alpha * p.thermostat.du_b.left, alpha * p.thermostat.du_b.right};
  q.memory = ScaledIdentitySpec{0.5, alpha};
  const InverseResult a = inverse_march(p, assemble_coefficients(p));
  const InverseResult b = inverse_march(q, assemble_coefficients(q));
  for (std::size_t n = 0; n < a.h.size(); ++n) EXPECT_NEAR(a.h[n], b.h[n], 1e-8 * (1.0 + std::abs(a.h[n])));
  for (std::size_t i = 0; i < p.sgrid.size(); ++i)
    EXPECT_NEAR(b.v.at(p.tgrid.steps(), i), alpha * a.v.at(p.tgrid.steps(), i), 1e-7);
}
