#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "thermemo/functions.hpp"
#include "thermemo/pde_ops.hpp"

using namespace thermemo;
using std::numbers::pi;

namespace {

Coefficients unit_coeffs(const SpaceGrid& g, double b1l = -1.0, double b1r = 1.0, double b0l = 0.0, double b0r = 0.0) {
  return {SpaceField::constant(g, 1.0), b1l, b1r, b0l, b0r};
}

MeasurementWeights bump_weights(const SpaceGrid& g) {
  return {SpaceField::sample(g, [](double x) { return x * x * (1 - x) * (1 - x); }), SpaceField::constant(g, 1.0), 0.0,
          0.0};
}

double max_interior_error(const SpaceField& f, double (*exact)(double)) {
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) worst = std::max(worst, std::abs(f[i] - exact(f.grid().node(i))));
  return worst;
}

}  // namespace

TEST(ApplyA, AnnihilatesConstants) {
  const SpaceGrid g(40);
  Coefficients c{SpaceField::sample(g, [](double x) { return 1.0 + x * x; }), -1.0, 1.0, 0.0, 0.0};
  const SpaceField au = apply_A(c, SpaceField::constant(g, 3.7));
  for (double v : au.values()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(ApplyA, ExactOnQuadraticsIncludingEndpoints) {
  const SpaceGrid g(50);
  const SpaceField au = apply_A(unit_coeffs(g), SpaceField::sample(g, [](double x) { return x * x; }));
  for (double v : au.values()) EXPECT_NEAR(v, 2.0, 1e-10);
}

TEST(ApplyA, VariableCoefficientSecondOrder) {
  auto err = [](std::size_t m) {
    const SpaceGrid g(m);
    const Coefficients c{SpaceField::sample(g, [](double x) { return 1.0 + x; }), -1.0, 1.0, 0.0, 0.0};
    return max_interior_error(apply_A(c, SpaceField::sample(g, [](double x) { return x * x; })),
                              [](double x) { return 2.0 + 4.0 * x; });
  };
  // the face average of a linear a is exact, so the conservative stencil reproduces 2 + 4x
  EXPECT_LE(err(40), 1e-10);
  auto err_sin = [](std::size_t m) {
    const SpaceGrid g(m);
    const Coefficients c{SpaceField::sample(g, [](double x) { return 1.0 + x * x; }), -1.0, 1.0, 0.0, 0.0};
    return max_interior_error(apply_A(c, SpaceField::sample(g, [](double x) { return std::sin(x); })), [](double x) {
      return 2.0 * x * std::cos(x) - (1.0 + x * x) * std::sin(x);
    });
  };
  const double ratio = err_sin(40) / err_sin(80);
  EXPECT_GT(ratio, 3.5);
  EXPECT_LT(ratio, 4.5);
}

TEST(ApplyB, Examples) {
  const SpaceGrid g(20);
  const auto one = apply_B(unit_coeffs(g, 1.0, 1.0), SpaceField::constant(g, 1.0));
  EXPECT_NEAR(one.left, 0.0, 1e-13);
  EXPECT_NEAR(one.right, 0.0, 1e-13);
  const auto lin = apply_B(unit_coeffs(g, 1.0, 1.0), SpaceField::sample(g, [](double x) { return x; }));
  EXPECT_NEAR(lin.left, 1.0, 1e-12);
  EXPECT_NEAR(lin.right, 1.0, 1e-12);
  const auto quad = apply_B(unit_coeffs(g, 2.0, 2.0, 1.0, 1.0), SpaceField::sample(g, [](double x) { return x * x; }));
  EXPECT_NEAR(quad.right, 5.0, 1e-12);
}

TEST(ApplyB, SecondOrderOneSided) {
  auto err = [](std::size_t m) {
    const SpaceGrid g(m);
    return std::abs(apply_B(unit_coeffs(g, 1.0, 1.0), SpaceField::sample(g, [](double x) { return std::exp(x); })).right -
                    std::exp(1.0));
  };
  const double ratio = err(20) / err(40);
  EXPECT_GT(ratio, 3.5);
  EXPECT_LT(ratio, 4.5);
}

TEST(Measure, MExamples) {
  const SpaceGrid g(100);
  MeasurementWeights w{SpaceField(g), SpaceField(g), 1.0, 0.0};
  SpaceField u = SpaceField::constant(g, 0.0);
  u[0] = 3.0;
  EXPECT_DOUBLE_EQ(measure_M(w, u.values(), g.dx()), 3.0);
  EXPECT_DOUBLE_EQ(measure_M(w, SpaceField(g), 3.0, 0.0), 3.0);
  w = {SpaceField(g), SpaceField::constant(g, 1.0), 0.0, 0.0};
  EXPECT_NEAR(measure_M(w, SpaceField::constant(g, 2.0).values(), g.dx()), 2.0, 1e-14);
  w.omega1 = SpaceField::sample(g, [](double x) { return x; });
  EXPECT_NEAR(measure_M(w, SpaceField::sample(g, [](double x) { return x; }).values(), g.dx()), 1.0 / 3.0, 1e-4);
}

TEST(Measure, PhiExamples) {
  const SpaceGrid g(100);
  const MeasurementWeights w = bump_weights(g);
  EXPECT_EQ(measure_Phi(w, SpaceField(g)), 0.0);
  EXPECT_NEAR(measure_Phi(w, SpaceField::constant(g, 1.0)), 1.0 / 30.0, 1e-5);
  EXPECT_NEAR(measure_Phi(w, SpaceField::sample(g, [](double x) { return x; })), 1.0 / 60.0, 1e-5);
}

TEST(Measure, Linear) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const SpaceGrid g(30);
  MeasurementWeights w = bump_weights(g);
  w.omega2_left = 0.3;
  w.omega2_right = -0.2;
  for (int k = 0; k < 20; ++k) {
    const SpaceField u = SpaceField::sample(g, [&](double) { return d(rng); });
    const SpaceField v = SpaceField::sample(g, [&](double) { return d(rng); });
    const SpaceField c = 1.5 * u + -0.5 * v;
    EXPECT_NEAR(measure_Phi(w, c), 1.5 * measure_Phi(w, u) - 0.5 * measure_Phi(w, v), 1e-15);
    EXPECT_NEAR(measure_M(w, c.values(), g.dx()),
                1.5 * measure_M(w, u.values(), g.dx()) - 0.5 * measure_M(w, v.values(), g.dx()), 1e-14);
  }
}

TEST(Weights, OmegaMustVanishOnTheBoundary) {
  const SpaceGrid g(20);
  EXPECT_NO_THROW(bump_weights(g).validate());
  MeasurementWeights bad{SpaceField::sample(g, [](double x) { return x * (1 - x); }), SpaceField::constant(g, 1.0), 0, 0};
  EXPECT_THROW(bad.validate(), InvalidSpec);
  bad.omega = SpaceField::sample(g, [](double x) { return 1.0 + x; });
  EXPECT_THROW(bad.validate(), InvalidSpec);
}

TEST(Coefficients, Validation) {
  const SpaceGrid g(10);
  EXPECT_THROW((Coefficients{SpaceField::constant(g, 0.0), -1, 1, 0, 0}.validate()), InvalidSpec);
  EXPECT_THROW((Coefficients{SpaceField::constant(g, 1.0), 0, 1, 0, 0}.validate()), InvalidSpec);
}

TEST(Psi1, Examples) {
  const SpaceGrid g(100);
  const MeasurementWeights w = bump_weights(g);
  const SpaceField chi0 = assemble_psi1(unit_coeffs(g), w, 0.0);
  for (double v : chi0.values()) EXPECT_EQ(v, 0.0);
  const MeasurementWeights zero{SpaceField(g), SpaceField(g), 0, 0};
  const SpaceField omega0 = assemble_psi1(unit_coeffs(g), zero, 2.0);
  for (double v : omega0.values()) EXPECT_EQ(v, 0.0);
  const SpaceField psi = assemble_psi1(unit_coeffs(g), w, 1.0);
  EXPECT_LE(max_interior_error(psi, [](double x) { return 2.0 - 12.0 * x + 12.0 * x * x; }), 1e-3);
  const SpaceField psi3 = assemble_psi1(unit_coeffs(g), w, 3.0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(psi3[i], 3.0 * psi[i], 1e-12);
}

TEST(Adjoint, ZeroAndConstant) {
  const SpaceGrid g(100);
  const MeasurementWeights w = bump_weights(g);
  EXPECT_EQ(adjoint_residual(unit_coeffs(g), w, SpaceField(g)), 0.0);
  // v = 1: residual is the quadrature of A omega, whose exact integral vanishes
  const double r = adjoint_residual(unit_coeffs(g), w, SpaceField::constant(g, 1.0));
  EXPECT_LE(r, 10.0 * g.dx() * g.dx() * l2_space(apply_A(unit_coeffs(g), w.omega)));
}

TEST(Adjoint, SecondOrderWhenVDoesNotVanishOnTheBoundary) {
  auto res = [](std::size_t m) {
    const SpaceGrid g(m);
    return adjoint_residual(unit_coeffs(g), bump_weights(g), SpaceField::sample(g, [](double x) { return std::exp(x); }));
  };
  const double r50 = res(50), r100 = res(100), r200 = res(200);
  EXPECT_GT(r50 / r100, 3.2);
  EXPECT_LT(r50 / r100, 4.8);
  EXPECT_GT(r100 / r200, 3.2);
  EXPECT_LT(r100 / r200, 4.8);
}

TEST(Adjoint, ExactForFieldsVanishingOnTheBoundary) {
  // with v(0) = v(1) = 0 the symmetric stencil telescopes completely
  const SpaceGrid g(100);
  const double r = adjoint_residual(unit_coeffs(g), bump_weights(g),
                                    SpaceField::sample(g, [](double x) { return std::sin(pi * x); }));
  EXPECT_LE(r, 1e-12);
}

TEST(StepSystem, SolvesTheImplicitStep) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (std::size_t m : {4u, 5u, 17u, 64u}) {
    const SpaceGrid g(m);
    const Coefficients c{SpaceField::sample(g, [](double x) { return 1.0 + 0.5 * x; }), -1.0, 1.0, 0.2, 0.1};
    const double dt = 0.01, kappa = 1.3;
    const StepSystem sys(c, dt, kappa);
    std::vector<double> rhs(g.size());
    for (double& v : rhs) v = d(rng);
    std::vector<double> u = rhs;
    sys.solve(u);
    SpaceField uf(g, u);
    const SpaceField au = apply_A(c, uf);
    const auto bu = apply_B(c, uf);
    for (std::size_t i = 1; i < m; ++i) EXPECT_NEAR(u[i] - dt * kappa * au[i], rhs[i], 1e-11);
    EXPECT_NEAR(kappa * bu.left + u[0], rhs[0], 1e-10);
    EXPECT_NEAR(kappa * bu.right + u[m], rhs[m], 1e-10);
  }
}
