#pragma once

// Identification of the memory kernel h from g(t) = Phi(u(t)).
//
// Differentiating the heat equation in time (v = D_t u) and applying Phi
// turns the first-kind relation for h into the second-kind system
//   D_t v = A v + h * A v + v* - [(psi1, v) + h * (psi1, v)] z0
//   B v   = -v + Psi(v) - h * B v + [(psi1, v) + h * (psi1, v)] z1 + v*_G
//   h     = h* - (psi1, v) - h * (psi1, v)
// with chi = 1/Phi(A u0), h* = chi (g'' - Phi(D_t f)), z0 = A u0, z1 = B u0,
// psi1 = chi A omega, v* = D_t f + h* z0, v*_G = -D_t q - h* z1,
// v(0) = A u0 + f(0). The system is marched in time: at each node the kernel
// value solves a scalar second-kind step, the field solves one implicit Euler
// step, and both are iterated to a fixed point (over a window of nodes in
// windowed mode) before being committed. Afterwards u = u0 + 1 * v.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermemo/convolution.hpp"
#include "thermemo/error.hpp"
#include "thermemo/feedback.hpp"
#include "thermemo/forward_solver.hpp"
#include "thermemo/grid.hpp"
#include "thermemo/hysteresis.hpp"
#include "thermemo/pde_ops.hpp"
#include "thermemo/report.hpp"

namespace thermemo {

struct InverseProblem {
  TimeGrid tgrid;
  SpaceGrid sgrid;
  Coefficients coeffs;
  ThermostatParams thermostat;
  MemoryOperatorSpec memory = PlaySpec{};
  MeasurementWeights weights;
  SpaceTimeField f;
  SpaceTimeField df;  // D_t f
  BoundarySeries q;
  BoundarySeries dq;  // D_t q
  SpaceField u0;
  TimeSeries g;
  std::optional<TimeSeries> g1;  // analytic g', g''; numeric differentiation when absent
  std::optional<TimeSeries> g2;
  std::size_t smoothing_window = 1;

  void validate() const {
    coeffs.validate();
    thermostat.validate();
    thermemo::validate(memory);
    if (!(coeffs.a.grid() == sgrid) || !(u0.grid() == sgrid) || !(weights.omega.grid() == sgrid))
      throw GridMismatch("inverse problem: space grids differ");
    if (!(f.tgrid() == tgrid) || !(df.tgrid() == tgrid) || !(g.grid() == tgrid) || !(q.left.grid() == tgrid) ||
        !(dq.left.grid() == tgrid) || !(thermostat.u_c.grid() == tgrid))
      throw GridMismatch("inverse problem: time grids differ");
  }

  TimeSeries g_prime() const;
  TimeSeries g_second() const;
};

/// Derivative of order 1 or 2 from a moving least-squares quadratic fit over
/// 2*window+1 nodes (shifted inward near the ends). window = 1 gives central
/// differences inside and second-order one-sided differences at the ends.
inline TimeSeries smooth_diff(const TimeSeries& g, int order, std::size_t window) {
  if (order != 1 && order != 2) throw InvalidSpec("smooth_diff: order must be 1 or 2");
  if (window < 1) throw InvalidSpec("smooth_diff: window must be >= 1");
  const std::size_t last = g.grid().steps();
  if (last < 2 * window) throw InvalidSpec("smooth_diff: series too short for the window");
  const double dt = g.grid().dt();
  const std::size_t width = 2 * window + 1;
  TimeSeries out(g.grid());
  for (std::size_t n = 0; n <= last; ++n) {
    const std::size_t lo = std::min(n >= window ? n - window : 0, last - 2 * window);
    // normal equations of the fit in s = (t - t_n)/dt
    std::array<double, 5> moment{};
    std::array<double, 3> rhs{};
    for (std::size_t j = 0; j < width; ++j) {
      const double s = static_cast<double>(lo + j) - static_cast<double>(n);
      double p = 1.0;
      for (int k = 0; k < 5; ++k) {
        moment[k] += p;
        if (k < 3) rhs[k] += p * g[lo + j];
        p *= s;
      }
    }
    std::array<std::array<double, 4>, 3> a{{{moment[0], moment[1], moment[2], rhs[0]},
                                           {moment[1], moment[2], moment[3], rhs[1]},
                                           {moment[2], moment[3], moment[4], rhs[2]}}};
    for (int c = 0; c < 3; ++c) {
      int piv = c;
      for (int r = c + 1; r < 3; ++r)
        if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
      std::swap(a[c], a[piv]);
      for (int r = c + 1; r < 3; ++r) {
        const double fct = a[r][c] / a[c][c];
        for (int k = c; k < 4; ++k) a[r][k] -= fct * a[c][k];
      }
    }
    std::array<double, 3> coef{};
    for (int r = 2; r >= 0; --r) {
      double acc = a[r][3];
      for (int k = r + 1; k < 3; ++k) acc -= a[r][k] * coef[k];
      coef[r] = acc / a[r][r];
    }
    out[n] = order == 1 ? coef[1] / dt : 2.0 * coef[2] / (dt * dt);
  }
  return out;
}

inline TimeSeries InverseProblem::g_prime() const { return g1 ? *g1 : smooth_diff(g, 1, smoothing_window); }
inline TimeSeries InverseProblem::g_second() const { return g2 ? *g2 : smooth_diff(g, 2, smoothing_window); }

struct InverseCoefficients {
  double chi = 0.0;
  TimeSeries h_star;
  SpaceField z0;
  BoundaryPair<double> z1;
  SpaceField psi1;
  SpaceTimeField v_star;
  BoundarySeries v_star_gamma;
  SpaceField v0;
};

struct CompatibilityResidual {
  std::string condition;
  double residual = 0.0;
};

/// Residuals of the initial compatibility conditions and the size of Phi(A u0).
inline std::vector<CompatibilityResidual> check_compatibility(const InverseProblem& p) {
  const double dx = p.sgrid.dx();
  const SpaceField au0 = apply_A(p.coeffs, p.u0);
  const SpaceField v0 = au0 + p.f.snapshot(0);
  const auto bu0 = apply_B(p.coeffs, p.u0);
  const double gp0 = p.g_prime()[0];
  const double rhs_left = p.thermostat.phi0 * p.thermostat.u_a.left[0] + p.thermostat.u_b.left[0] - p.u0.front();
  const double rhs_right = p.thermostat.phi0 * p.thermostat.u_a.right[0] + p.thermostat.u_b.right[0] - p.u0.back();
  return {
      {"compatibility: Phi(u0) = g(0)", std::abs(measure_Phi(p.weights, p.u0.values(), dx) - p.g[0])},
      {"compatibility: Phi(v0) = g'(0)", std::abs(measure_Phi(p.weights, v0.values(), dx) - gp0)},
      {"compatibility: B u0 + q(0) = phi0 u_A(0) + u_B(0) - u0 at x=0", std::abs(bu0.left + p.q.left[0] - rhs_left)},
      {"compatibility: B u0 + q(0) = phi0 u_A(0) + u_B(0) - u0 at x=1", std::abs(bu0.right + p.q.right[0] - rhs_right)},
      {"nondegeneracy: |Phi(A u0)|", std::abs(measure_Phi(p.weights, au0.values(), dx))},
  };
}

inline InverseCoefficients assemble_coefficients(const InverseProblem& p, double tol_chi = 1e-10) {
  p.validate();
  const double dx = p.sgrid.dx();
  InverseCoefficients c;
  c.z0 = apply_A(p.coeffs, p.u0);
  const double phi_au0 = measure_Phi(p.weights, c.z0.values(), dx);
  if (!(std::abs(phi_au0) > tol_chi)) throw ChiSingular(phi_au0);
  c.chi = 1.0 / phi_au0;

  const TimeSeries g2 = p.g_second();
  c.h_star = TimeSeries(p.tgrid);
  for (std::size_t n = 0; n < p.tgrid.size(); ++n)
    c.h_star[n] = c.chi * (g2[n] - measure_Phi(p.weights, p.df.row(n), dx));

  c.z1 = apply_B(p.coeffs, p.u0);
  c.psi1 = assemble_psi1(p.coeffs, p.weights, c.chi);
  c.v_star = SpaceTimeField(p.tgrid, p.sgrid);
  c.v_star_gamma = {TimeSeries(p.tgrid), TimeSeries(p.tgrid)};
  for (std::size_t n = 0; n < p.tgrid.size(); ++n) {
    for (std::size_t i = 0; i < p.sgrid.size(); ++i) c.v_star.at(n, i) = p.df.at(n, i) + c.h_star[n] * c.z0[i];
    c.v_star_gamma.left[n] = -p.dq.left[n] - c.h_star[n] * c.z1.left;
    c.v_star_gamma.right[n] = -p.dq.right[n] - c.h_star[n] * c.z1.right;
  }
  c.v0 = c.z0 + p.f.snapshot(0);
  return c;
}

struct InverseResult {
  SpaceTimeField v;
  TimeSeries h;
  RunReport report;
};

inline InverseResult inverse_march(const InverseProblem& p, const InverseCoefficients& c, const SolverControls& ctl = {}) {
  const auto start = std::chrono::steady_clock::now();
  p.validate();
  if (ctl.window_steps < 1) throw InvalidSpec("inverse_march: window_steps must be >= 1");

  InverseResult res{SpaceTimeField(p.tgrid, p.sgrid), TimeSeries(p.tgrid), {}};

  // compatibility gate
  {
    const auto compat = check_compatibility(p);
    const double dt = p.tgrid.dt(), dx = p.sgrid.dx();
    const double scale = 1.0 + max_abs(p.u0.values()) + max_abs(p.g.values());
    const double tol_compat = 10.0 * (dt + dx * dx) * scale;
    for (std::size_t k = 0; k + 1 < compat.size(); ++k) {
      if (compat[k].residual > tol_compat) {
        const std::string msg = "compatibility condition violated: " + compat[k].condition +
                                " (residual " + std::to_string(compat[k].residual) + ")";
        if (ctl.strict) throw CompatibilityViolation(msg);
        res.report.warnings.push_back(msg);
      }
    }
  }

  const std::size_t steps = p.tgrid.steps();
  const std::size_t cols = p.sgrid.size();
  const std::size_t m = cols - 1;
  const double dt = p.tgrid.dt();
  const double dx = p.sgrid.dx();

  SpaceTimeField& v = res.v;
  TimeSeries& h = res.h;
  v.set_snapshot(0, c.v0);

  SpaceTimeField av(p.tgrid, p.sgrid);
  std::vector<BoundaryPair<double>> bv(steps + 1);
  std::vector<double> s(steps + 1, 0.0);     // (psi1, v(t_n))
  std::vector<double> mv(steps + 1, 0.0);    // M v(t_n)
  std::vector<double> xin(steps + 1, 0.0);   // M u0 + (1 * M v)(t_n)
  apply_A(p.coeffs, v.row(0), av.row(0));
  bv[0] = apply_B(p.coeffs, v.row(0), dx);
  // (psi1, v) is evaluated as chi Phi(A v): the two agree for omega vanishing to
  // first order on the boundary, and the latter is exactly the pairing the data obey
  auto pairing = [&](std::size_t n) { return c.chi * measure_Phi(p.weights, av.row(n), dx); };
  s[0] = pairing(0);
  h[0] = c.h_star[0] - s[0];
  mv[0] = measure_M(p.weights, v.row(0), dx);
  xin[0] = measure_M(p.weights, p.u0.values(), dx);

  const double kappa = 1.0 + 0.5 * dt * h[0];
  const StepSystem system(p.coeffs, dt, kappa);
  const double volterra_weight = 0.5 * dt;

  FeedbackMarch feedback(p.thermostat, p.memory);
  feedback.begin_trial();
  feedback.advance(0, xin[0]);
  feedback.commit();
  if (feedback.clamped_initial()) res.report.warnings.push_back("play initial output clamped to the admissible band");

  // kernel node from the current s(t_n): h_n (1 + s_0 dt/2) = h*_n - s_n - dt (h_0 s_n / 2 + sum_{k=1}^{n-1} h_k s_{n-k})
  auto kernel_node = [&](std::size_t n) {
    double lag = 0.0;
    for (std::size_t k = 1; k < n; ++k) lag += h[k] * s[n - k];
    const double rhs = c.h_star[n] - s[n] - dt * (0.5 * h[0] * s[n] + lag);
    return volterra2_solve_node(s[0], rhs, volterra_weight, n);
  };

  const double h_scale = std::max(max_abs(c.h_star.values()), 1e-300);
  std::vector<double> rhs(cols), lagged(cols), previous(cols);
  std::size_t window_index = 0;
  for (std::size_t n0 = 0; n0 < steps; n0 += ctl.window_steps, ++window_index) {
    const std::size_t n1 = std::min(n0 + ctl.window_steps, steps);
    // initial iterate: freeze the last committed node over the window
    for (std::size_t n = n0 + 1; n <= n1; ++n) {
      std::copy(v.row(n0).begin(), v.row(n0).end(), v.row(n).begin());
      std::copy(av.row(n0).begin(), av.row(n0).end(), av.row(n).begin());
      bv[n] = bv[n0];
      h[n] = h[n0];
    }
    std::vector<double> history;
    std::size_t sweeps = 0;
    bool converged = false;
    while (!converged) {
      ++sweeps;
      double update = 0.0;
      feedback.begin_trial();
      for (std::size_t n = n0 + 1; n <= n1; ++n) {
        // nonlinear and kernel terms from the current iterate of node n
        auto vn = v.row(n);
        s[n] = pairing(n);
        mv[n] = measure_M(p.weights, vn, dx);
        const double hn = kernel_node(n);
        const double h_change = std::abs(hn - h[n]);
        h[n] = hn;
        double hs = 0.5 * (h[0] * s[n] + h[n] * s[0]);
        for (std::size_t k = 1; k < n; ++k) hs += h[k] * s[n - k];
        const double bracket = s[n] + dt * hs;

        xin[n] = xin[n - 1] + 0.5 * dt * (mv[n - 1] + mv[n]);
        const auto node = feedback.advance(n, xin[n]);
        const auto psi = feedback.psi(n, node);

        // memory history: all terms of (h * A v)(t_n), (h * B v)(t_n) but the k = 0 one
        std::fill(lagged.begin(), lagged.end(), 0.0);
        BoundaryPair<double> lagged_b{0.0, 0.0};
        for (std::size_t k = 1; k <= n; ++k) {
          const double wk = (k == n ? 0.5 : 1.0) * dt * h[k];
          if (wk == 0.0) continue;
          auto past = av.row(n - k);
          for (std::size_t i = 1; i < m; ++i) lagged[i] += wk * past[i];
          lagged_b.left += wk * bv[n - k].left;
          lagged_b.right += wk * bv[n - k].right;
        }

        auto prev = v.row(n - 1);
        for (std::size_t i = 1; i < m; ++i)
          rhs[i] = prev[i] + dt * (lagged[i] + c.v_star.at(n, i) - bracket * c.z0[i]);
        rhs[0] = psi.left - lagged_b.left + bracket * c.z1.left + c.v_star_gamma.left[n];
        rhs[m] = psi.right - lagged_b.right + bracket * c.z1.right + c.v_star_gamma.right[n];
        system.solve(rhs);

        std::copy(vn.begin(), vn.end(), previous.begin());
        std::copy(rhs.begin(), rhs.end(), vn.begin());
        apply_A(p.coeffs, vn, av.row(n));
        bv[n] = apply_B(p.coeffs, vn, dx);
        update = std::max(update, detail::relative_update(rhs, previous));
        update = std::max(update, h_change / std::max(std::abs(hn), h_scale));
      }
      history.push_back(update);
      if (!std::isfinite(update)) throw PicardDiverged(n1, history.size() > 1 ? history[history.size() - 2] : update, update);
      if (update < ctl.tol_picard) {
        converged = true;
      } else if (sweeps >= ctl.max_picard) {
        throw PicardDiverged(n1, history.size() > 1 ? history[history.size() - 2] : update, update);
      }
    }

    // commit: the kernel equation is re-solved from the accepted field
    feedback.begin_trial();
    for (std::size_t n = n0 + 1; n <= n1; ++n) {
      auto vn = v.row(n);
      s[n] = pairing(n);
      mv[n] = measure_M(p.weights, vn, dx);
      h[n] = kernel_node(n);
      xin[n] = xin[n - 1] + 0.5 * dt * (mv[n - 1] + mv[n]);
      feedback.advance(n, xin[n]);
    }
    feedback.commit();
    res.report.iterations.push_back(sweeps);
    res.report.update_history.push_back(std::move(history));
  }

  // discrete kernel equation residual, max over nodes
  double kernel_residual = 0.0;
  for (std::size_t n = 0; n <= steps; ++n) {
    double hs = 0.0;
    if (n > 0) {
      hs = 0.5 * (h[0] * s[n] + h[n] * s[0]);
      for (std::size_t k = 1; k < n; ++k) hs += h[k] * s[n - k];
      hs *= dt;
    }
    kernel_residual = std::max(kernel_residual, std::abs(h[n] + s[n] + hs - c.h_star[n]));
  }
  res.report.metrics["kernel_equation_residual"] = kernel_residual;
  res.report.metrics["max_picard_iterations"] = static_cast<double>(res.report.max_iterations());
  res.report.metrics["chi"] = c.chi;
  res.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

/// u = u0 + 1 * v.
inline SpaceTimeField reconstruct_u(const SpaceField& u0, const SpaceTimeField& v) {
  if (!(u0.grid() == v.sgrid())) throw GridMismatch("reconstruct_u: grid mismatch");
  SpaceTimeField u = antiderivative(v);
  for (std::size_t n = 0; n < u.rows(); ++n) {
    auto r = u.row(n);
    for (std::size_t i = 0; i < u.cols(); ++i) r[i] += u0[i];
  }
  return u;
}

/// Residuals of the original (undifferentiated) problem for a candidate (u, v, h).
struct Problem2Residuals {
  double interior = 0.0;             // (a) D_t u - A u - h * A u - f, L2(Q_T)
  double boundary = 0.0;             // (b) B u + h * B u + q - u_e + u, L2(Sigma_T)
  double measurement = 0.0;          // (c) max_n |Phi(u^n) - g_n|
  double derivative_identity = 0.0;  // (d) D_t(h * A u) - h A u0 - h * A v, L2(Q_T)
};

inline Problem2Residuals residual_problem2(const SpaceTimeField& u, const SpaceTimeField& v, const TimeSeries& h,
                                           const InverseProblem& p) {
  const std::size_t steps = u.tgrid().steps();
  const std::size_t cols = u.cols();
  const std::size_t m = cols - 1;
  const double dt = u.tgrid().dt();
  const double dx = u.sgrid().dx();

  SpaceTimeField au(u.tgrid(), u.sgrid()), avf(u.tgrid(), u.sgrid());
  std::vector<BoundaryPair<double>> bu(steps + 1);
  for (std::size_t n = 0; n <= steps; ++n) {
    apply_A(p.coeffs, u.row(n), au.row(n));
    apply_A(p.coeffs, v.row(n), avf.row(n));
    bu[n] = apply_B(p.coeffs, u.row(n), dx);
  }
  auto conv_field = [&](const SpaceTimeField& z, std::size_t n, std::size_t i) {
    double acc = 0.0;
    if (n == 0) return acc;
    acc = 0.5 * (h[0] * z.at(n, i) + h[n] * z.at(0, i));
    for (std::size_t k = 1; k < n; ++k) acc += h[k] * z.at(n - k, i);
    return dt * acc;
  };

  Problem2Residuals r;
  // (a)
  double acc = 0.0;
  for (std::size_t n = 1; n <= steps; ++n) {
    double row = 0.0;
    for (std::size_t i = 1; i < m; ++i) {
      const double res = (u.at(n, i) - u.at(n - 1, i)) / dt - au.at(n, i) - conv_field(au, n, i) - p.f.at(n, i);
      row += res * res;
    }
    acc += row * dx;
  }
  r.interior = std::sqrt(acc * dt);

  // (b)
  const BoundarySeries ue = external_temperature(p.thermostat, p.memory, p.weights, u);
  acc = 0.0;
  for (std::size_t n = 1; n <= steps; ++n) {
    double cl = 0.0, cr = 0.0;
    cl = 0.5 * (h[0] * bu[n].left + h[n] * bu[0].left);
    cr = 0.5 * (h[0] * bu[n].right + h[n] * bu[0].right);
    for (std::size_t k = 1; k < n; ++k) {
      cl += h[k] * bu[n - k].left;
      cr += h[k] * bu[n - k].right;
    }
    const double rl = bu[n].left + dt * cl + p.q.left[n] - ue.left[n] + u.at(n, 0);
    const double rr = bu[n].right + dt * cr + p.q.right[n] - ue.right[n] + u.at(n, m);
    acc += rl * rl + rr * rr;
  }
  r.boundary = std::sqrt(acc * dt);

  // (c)
  for (std::size_t n = 0; n <= steps; ++n)
    r.measurement = std::max(r.measurement, std::abs(measure_Phi(p.weights, u.row(n), dx) - p.g[n]));

  // (d)
  SpaceTimeField conv(u.tgrid(), u.sgrid());
  for (std::size_t n = 0; n <= steps; ++n)
    for (std::size_t i = 1; i < m; ++i) conv.at(n, i) = conv_field(au, n, i);
  acc = 0.0;
  for (std::size_t n = 0; n <= steps; ++n) {
    double row = 0.0;
    for (std::size_t i = 1; i < m; ++i) {
      double d;
      if (n == 0) {
        d = (-3.0 * conv.at(0, i) + 4.0 * conv.at(1, i) - conv.at(2, i)) / (2.0 * dt);
      } else if (n == steps) {
        d = (3.0 * conv.at(n, i) - 4.0 * conv.at(n - 1, i) + conv.at(n - 2, i)) / (2.0 * dt);
      } else {
        d = (conv.at(n + 1, i) - conv.at(n - 1, i)) / (2.0 * dt);
      }
      const double res = d - h[n] * au.at(0, i) - conv_field(avf, n, i);
      row += res * res;
    }
    acc += trapezoid_weight(n, steps) * row * dx;
  }
  r.derivative_identity = std::sqrt(acc * dt);
  return r;
}

}  // namespace thermemo
