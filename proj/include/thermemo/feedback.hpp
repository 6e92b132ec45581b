#pragma once

// Thermostat feedback on the boundary:
//   eps*phi' + phi = W(M(u)) + u_C,  phi(0) = phi0,  u_e = phi*u_A + u_B,
// written in closed form through E1(t) = exp(-t/eps)/eps:
//   u_e = (E1 * r) u_A + E0,  E0 = [(E1 * u_C) + eps*phi0*E1] u_A + u_B,
// together with its time derivative Psi(v) for the differentiated problem.
// Time derivatives of convolutions use D_t(E1 * r) = (r - E1 * r)/eps.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "thermemo/convolution.hpp"
#include "thermemo/error.hpp"
#include "thermemo/grid.hpp"
#include "thermemo/hysteresis.hpp"
#include "thermemo/pde_ops.hpp"

namespace thermemo {

struct ThermostatParams {
  double epsilon = 1.0;
  double phi0 = 0.0;
  TimeSeries u_c;
  BoundarySeries u_a;
  BoundarySeries u_b;
  BoundarySeries du_a;  // time derivatives of u_a, u_b
  BoundarySeries du_b;

  void validate() const {
    if (!(epsilon > 0.0)) throw InvalidSpec("thermostat: epsilon must be positive");
    for (const TimeSeries* s : {&u_a.left, &u_a.right, &u_b.left, &u_b.right, &du_a.left, &du_a.right, &du_b.left,
                                &du_b.right})
      u_c.check_same(*s);
  }
};

/// Central differences in the interior, second-order one-sided at the ends.
inline TimeSeries numeric_time_derivative(const TimeSeries& s) {
  TimeSeries d(s.grid());
  const std::size_t n = s.size() - 1;
  const double dt = s.grid().dt();
  for (std::size_t k = 1; k < n; ++k) d[k] = (s[k + 1] - s[k - 1]) / (2.0 * dt);
  d[0] = (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * dt);
  d[n] = (3.0 * s[n] - 4.0 * s[n - 1] + s[n - 2]) / (2.0 * dt);
  return d;
}

/// Fills du_a, du_b from sampled u_a, u_b (sampled-data mode).
inline ThermostatParams with_numeric_derivatives(ThermostatParams p) {
  p.du_a = {numeric_time_derivative(p.u_a.left), numeric_time_derivative(p.u_a.right)};
  p.du_b = {numeric_time_derivative(p.u_b.left), numeric_time_derivative(p.u_b.right)};
  return p;
}

inline TimeSeries e1_series(const ThermostatParams& p, const TimeGrid& tg) {
  const double eps = p.epsilon;
  return TimeSeries::sample(tg, [eps](double t) { return std::exp(-t / eps) / eps; });
}

inline BoundarySeries e0_series(const ThermostatParams& p, const TimeGrid& tg) {
  const TimeSeries e1 = e1_series(p, tg);
  const TimeSeries e1uc = convolve(e1, p.u_c);
  BoundarySeries out{TimeSeries(tg), TimeSeries(tg)};
  for (std::size_t n = 0; n < tg.size(); ++n) {
    const double factor = e1uc[n] + p.epsilon * p.phi0 * e1[n];
    out.left[n] = factor * p.u_a.left[n] + p.u_b.left[n];
    out.right[n] = factor * p.u_a.right[n] + p.u_b.right[n];
  }
  return out;
}

/// phi(t_n) = exp(-t_n/eps) phi0 + (E1 * (w + u_C))(t_n).
inline TimeSeries thermostat_ode_solve(const ThermostatParams& p, const TimeSeries& w_series) {
  const TimeSeries e1 = e1_series(p, w_series.grid());
  TimeSeries phi = convolve(e1, w_series + p.u_c);
  for (std::size_t n = 0; n < phi.size(); ++n) phi[n] += std::exp(-w_series.grid().node(n) / p.epsilon) * p.phi0;
  return phi;
}

/// Node-by-node evaluation of r = W(X) and of the feedback terms driven by
/// it. A trial chain restarts from the committed memory state, so Picard
/// iterates never leak into the hysteresis history until committed.
class FeedbackMarch {
 public:
  struct Node {
    double r = 0.0;    // W(X)(t_n)
    double e1r = 0.0;  // (E1 * r)(t_n)
  };

  FeedbackMarch(const ThermostatParams& p, const MemoryOperatorSpec& spec)
      : p_(&p), committed_(spec), work_(spec), r_(p.u_c.size(), 0.0) {
    p.validate();
    const TimeGrid& tg = p.u_c.grid();
    e1_ = e1_series(p, tg);
    e1uc_ = convolve(e1_, p.u_c);
  }

  /// Restart the trial chain from the last committed node.
  void begin_trial() {
    work_ = committed_;
    next_ = committed_next_;
  }

  /// Advance the trial chain to node n with memory input x.
  Node advance(std::size_t n, double x) {
    if (n != next_ || n >= r_.size()) throw IndexOutOfRange("FeedbackMarch: nodes must be advanced in order");
    r_[n] = work_.step(x);
    ++next_;
    return {r_[n], convolve_at(e1_.values(), r_, n, e1_.grid().dt())};
  }

  /// Accept the trial chain up to its current position.
  void commit() {
    committed_ = work_;
    committed_next_ = next_;
  }

  std::size_t committed_nodes() const { return committed_next_; }
  bool clamped_initial() const { return committed_.clamped_initial(); }

  double phi(std::size_t n, const Node& v) const {
    return std::exp(-p_->u_c.grid().node(n) / p_->epsilon) * p_->phi0 + v.e1r + e1uc_[n];
  }

  /// u_e = phi u_A + u_B at node n.
  BoundaryPair<double> external(std::size_t n, const Node& v) const {
    const double ph = phi(n, v);
    return {ph * p_->u_a.left[n] + p_->u_b.left[n], ph * p_->u_a.right[n] + p_->u_b.right[n]};
  }

  /// Psi(v)(t_n) = D_t(E1*r) u_A + (E1*r) D_t u_A + D_t E0.
  BoundaryPair<double> psi(std::size_t n, const Node& v) const {
    const double eps = p_->epsilon;
    const double d_e1r = (v.r - v.e1r) / eps;
    const double e0_factor = e1uc_[n] + eps * p_->phi0 * e1_[n];
    const double d_e0_factor = (p_->u_c[n] - e1uc_[n]) / eps - p_->phi0 * e1_[n];
    const double phi_like = v.e1r + e0_factor;
    const double dphi_like = d_e1r + d_e0_factor;
    return {dphi_like * p_->u_a.left[n] + phi_like * p_->du_a.left[n] + p_->du_b.left[n],
            dphi_like * p_->u_a.right[n] + phi_like * p_->du_a.right[n] + p_->du_b.right[n]};
  }

 private:
  const ThermostatParams* p_;
  MemoryState committed_;
  MemoryState work_;
  std::size_t committed_next_ = 0;
  std::size_t next_ = 0;
  TimeSeries e1_;
  TimeSeries e1uc_;
  std::vector<double> r_;
};

/// X(t_n) = M(u0) + (1 * M v)(t_n) for every node.
inline TimeSeries memory_input(const MeasurementWeights& w, const SpaceField& u0, const SpaceTimeField& v) {
  TimeSeries mv(v.tgrid());
  const double dx = v.sgrid().dx();
  for (std::size_t n = 0; n < v.rows(); ++n) mv[n] = measure_M(w, v.row(n), dx);
  TimeSeries x = antiderivative(mv);
  const double m0 = measure_M(w, u0.values(), dx);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] += m0;
  return x;
}

/// r_v = W(M u0 + 1 * M v).
inline TimeSeries rv_series(const MemoryOperatorSpec& spec, const MeasurementWeights& w, const SpaceField& u0,
                            const SpaceTimeField& v) {
  if (!(u0.grid() == v.sgrid())) throw GridMismatch("rv_series: u0 and v live on different space grids");
  return w_apply(spec, memory_input(w, u0, v));
}

inline BoundarySeries psi_eval(const ThermostatParams& p, const MemoryOperatorSpec& spec, const MeasurementWeights& w,
                               const SpaceField& u0, const SpaceTimeField& v) {
  if (!(p.u_c.grid() == v.tgrid())) throw GridMismatch("psi_eval: thermostat data and v on different time grids");
  const TimeSeries x = memory_input(w, u0, v);
  FeedbackMarch march(p, spec);
  BoundarySeries out{TimeSeries(v.tgrid()), TimeSeries(v.tgrid())};
  for (std::size_t n = 0; n < x.size(); ++n) {
    march.begin_trial();
    const auto node = march.advance(n, x[n]);
    march.commit();
    const auto ps = march.psi(n, node);
    out.left[n] = ps.left;
    out.right[n] = ps.right;
  }
  return out;
}

/// Psi of the history prefix_v on [0, tau] continued by tail_v on [0, delta],
/// reported on the tail window only.
inline BoundarySeries psi_restart(const ThermostatParams& p, const MemoryOperatorSpec& spec,
                                  const MeasurementWeights& w, const SpaceField& u0, const SpaceTimeField& prefix_v,
                                  const SpaceTimeField& tail_v) {
  const double dt = prefix_v.tgrid().dt();
  if (std::abs(tail_v.tgrid().dt() - dt) > 1e-13 * dt || !(prefix_v.sgrid() == tail_v.sgrid()))
    throw GridMismatch("psi_restart: prefix and tail grids differ");
  const std::size_t n1 = prefix_v.tgrid().steps();
  const std::size_t n2 = tail_v.tgrid().steps();
  auto last = prefix_v.row(n1);
  auto first = tail_v.row(0);
  for (std::size_t i = 0; i < first.size(); ++i)
    if (std::abs(last[i] - first[i]) > 1e-12 * (1.0 + std::abs(last[i])))
      throw InvalidSpec("psi_restart: tail does not start from the end of the prefix");

  const TimeGrid full = TimeGrid::with_step(dt, n1 + n2);
  if (p.u_c.size() < full.size()) throw GridMismatch("psi_restart: thermostat data shorter than the joined window");
  SpaceTimeField joined(full, prefix_v.sgrid());
  for (std::size_t n = 0; n <= n1; ++n) std::copy(prefix_v.row(n).begin(), prefix_v.row(n).end(), joined.row(n).begin());
  for (std::size_t n = 1; n <= n2; ++n)
    std::copy(tail_v.row(n).begin(), tail_v.row(n).end(), joined.row(n1 + n).begin());

  // thermostat data restricted to the joined window
  auto cut = [&](const TimeSeries& s) { return s.prefix(full.steps()); };
  ThermostatParams q{p.epsilon, p.phi0, cut(p.u_c), {cut(p.u_a.left), cut(p.u_a.right)},
                     {cut(p.u_b.left), cut(p.u_b.right)}, {cut(p.du_a.left), cut(p.du_a.right)},
                     {cut(p.du_b.left), cut(p.du_b.right)}};
  const BoundarySeries all = psi_eval(q, spec, w, u0, joined);
  BoundarySeries out{TimeSeries(tail_v.tgrid()), TimeSeries(tail_v.tgrid())};
  for (std::size_t n = 0; n <= n2; ++n) {
    out.left[n] = all.left[n1 + n];
    out.right[n] = all.right[n1 + n];
  }
  return out;
}

/// u_e = F(W(M(u))) on both boundary points, from a full temperature history.
inline BoundarySeries external_temperature(const ThermostatParams& p, const MemoryOperatorSpec& spec,
                                           const MeasurementWeights& w, const SpaceTimeField& u) {
  FeedbackMarch march(p, spec);
  BoundarySeries out{TimeSeries(u.tgrid()), TimeSeries(u.tgrid())};
  const double dx = u.sgrid().dx();
  for (std::size_t n = 0; n < u.rows(); ++n) {
    march.begin_trial();
    const auto node = march.advance(n, measure_M(w, u.row(n), dx));
    march.commit();
    const auto ue = march.external(n, node);
    out.left[n] = ue.left;
    out.right[n] = ue.right;
  }
  return out;
}

}  // namespace thermemo
