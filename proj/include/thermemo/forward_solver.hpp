#pragma once

// Forward simulation with a known memory kernel h:
//   D_t u = A u + h * A u + f                    in (0,T) x (0,1)
//   B u + h * B u + q = F(W(M(u))) - u           at x = 0, 1
//   u(0) = u0
// Implicit Euler in time. The memory integrals use trapezoid quadrature with
// the implicit endpoint h(0) (A u^n) dt/2 folded into the step matrix; the
// feedback on the boundary rows is resolved by Picard iteration per step.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "thermemo/convolution.hpp"
#include "thermemo/error.hpp"
#include "thermemo/feedback.hpp"
#include "thermemo/grid.hpp"
#include "thermemo/hysteresis.hpp"
#include "thermemo/pde_ops.hpp"
#include "thermemo/report.hpp"

namespace thermemo {

struct ForwardProblem {
  TimeGrid tgrid;
  SpaceGrid sgrid;
  Coefficients coeffs;
  ThermostatParams thermostat;
  MemoryOperatorSpec memory = PlaySpec{};
  MeasurementWeights weights;
  SpaceTimeField f;
  BoundarySeries q;
  SpaceField u0;
  TimeSeries h;

  void validate() const {
    coeffs.validate();
    thermostat.validate();
    thermemo::validate(memory);
    if (!(coeffs.a.grid() == sgrid) || !(u0.grid() == sgrid) || !(weights.omega1.grid() == sgrid))
      throw GridMismatch("forward problem: space grids differ");
    if (!(f.tgrid() == tgrid) || !(f.sgrid() == sgrid)) throw GridMismatch("forward problem: source grid mismatch");
    if (!(h.grid() == tgrid) || !(q.left.grid() == tgrid) || !(q.right.grid() == tgrid) ||
        !(thermostat.u_c.grid() == tgrid))
      throw GridMismatch("forward problem: time grids differ");
  }
};

struct ForwardResult {
  SpaceTimeField u;
  RunReport report;
};

namespace detail {

inline double relative_update(std::span<const double> next, std::span<const double> prev) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) {
    diff = std::max(diff, std::abs(next[i] - prev[i]));
    scale = std::max(scale, std::abs(next[i]));
  }
  if (diff == 0.0) return 0.0;
  return diff / std::max(scale, 1e-300);
}

}  // namespace detail

inline ForwardResult forward_solve(const ForwardProblem& p, const SolverControls& ctl = {}) {
  const auto start = std::chrono::steady_clock::now();
  p.validate();
  const std::size_t steps = p.tgrid.steps();
  const std::size_t cols = p.sgrid.size();
  const std::size_t m = cols - 1;
  const double dt = p.tgrid.dt();
  const double dx = p.sgrid.dx();

  ForwardResult res{SpaceTimeField(p.tgrid, p.sgrid), {}};
  SpaceTimeField& u = res.u;
  u.set_snapshot(0, p.u0);

  SpaceTimeField au(p.tgrid, p.sgrid);
  std::vector<BoundaryPair<double>> bu(steps + 1);
  apply_A(p.coeffs, u.row(0), au.row(0));
  bu[0] = apply_B(p.coeffs, u.row(0), dx);

  const double kappa = 1.0 + 0.5 * dt * p.h[0];
  const StepSystem system(p.coeffs, dt, kappa);

  FeedbackMarch feedback(p.thermostat, p.memory);
  feedback.begin_trial();
  feedback.advance(0, measure_M(p.weights, u.row(0), dx));
  feedback.commit();
  if (feedback.clamped_initial()) res.report.warnings.push_back("play initial output clamped to the admissible band");

  std::vector<double> base(cols), rhs(cols), iterate(cols), lagged(cols);
  for (std::size_t n = 1; n <= steps; ++n) {
    // history part of (h * A u)(t_n) and (h * B u)(t_n): all but the k = 0 term
    std::fill(lagged.begin(), lagged.end(), 0.0);
    BoundaryPair<double> lagged_b{0.0, 0.0};
    for (std::size_t k = 1; k <= n; ++k) {
      const double wk = (k == n ? 0.5 : 1.0) * dt * p.h[k];
      if (wk == 0.0) continue;
      auto past = au.row(n - k);
      for (std::size_t i = 1; i < m; ++i) lagged[i] += wk * past[i];
      lagged_b.left += wk * bu[n - k].left;
      lagged_b.right += wk * bu[n - k].right;
    }
    auto prev = u.row(n - 1);
    for (std::size_t i = 1; i < m; ++i) base[i] = prev[i] + dt * (lagged[i] + p.f.at(n, i));

    std::copy(prev.begin(), prev.end(), iterate.begin());
    std::vector<double> history;
    std::size_t it = 0;
    for (;;) {
      ++it;
      feedback.begin_trial();
      const auto node = feedback.advance(n, measure_M(p.weights, iterate, dx));
      const auto ue = feedback.external(n, node);
      std::copy(base.begin(), base.end(), rhs.begin());
      rhs[0] = ue.left - p.q.left[n] - lagged_b.left;
      rhs[m] = ue.right - p.q.right[n] - lagged_b.right;
      system.solve(rhs);
      const double upd = detail::relative_update(rhs, iterate);
      history.push_back(upd);
      std::copy(rhs.begin(), rhs.end(), iterate.begin());
      if (!std::isfinite(upd)) throw PicardDiverged(n, history.size() > 1 ? history[history.size() - 2] : upd, upd);
      if (upd < ctl.tol_picard) break;
      if (it >= ctl.max_picard)
        throw PicardDiverged(n, history.size() > 1 ? history[history.size() - 2] : upd, upd);
    }
    std::copy(iterate.begin(), iterate.end(), u.row(n).begin());
    apply_A(p.coeffs, u.row(n), au.row(n));
    bu[n] = apply_B(p.coeffs, u.row(n), dx);
    feedback.begin_trial();
    feedback.advance(n, measure_M(p.weights, u.row(n), dx));
    feedback.commit();
    res.report.iterations.push_back(it);
    res.report.update_history.push_back(std::move(history));
  }
  res.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  res.report.metrics["max_picard_iterations"] = static_cast<double>(res.report.max_iterations());
  return res;
}

/// g(t_n) = Phi(u(t_n)).
inline TimeSeries emit_measurement(const SpaceTimeField& u, const MeasurementWeights& w) {
  TimeSeries g(u.tgrid());
  for (std::size_t n = 0; n < u.rows(); ++n) g[n] = measure_Phi(w, u.row(n), u.sgrid().dx());
  return g;
}

}  // namespace thermemo
