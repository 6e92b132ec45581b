#pragma once

// Discrete A = D_x(a D_x), boundary operator B = b1 D_x + b0, the measurement
// functionals M and Phi, and the linear system of one implicit time step.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "thermemo/error.hpp"
#include "thermemo/grid.hpp"

namespace thermemo {

struct Coefficients {
  SpaceField a;
  double b1_left = -1.0;
  double b1_right = 1.0;
  double b0_left = 0.0;
  double b0_right = 0.0;

  void validate() const {
    if (a.size() == 0) throw InvalidSpec("coefficients: diffusivity not set");
    const double amin = *std::min_element(a.values().begin(), a.values().end());
    if (!(amin > 0.0)) throw InvalidSpec("coefficients: diffusivity must be positive");
    if (b1_left == 0.0 || b1_right == 0.0) throw InvalidSpec("coefficients: b1 must be nonzero on both endpoints");
  }
};

struct MeasurementWeights {
  SpaceField omega;   // Phi weight, vanishing with its derivative on the boundary
  SpaceField omega1;  // interior sensor density of M
  double omega2_left = 0.0;
  double omega2_right = 0.0;

  /// Nodal vanishing of omega and of its one-sided first differences.
  void validate() const {
    const double dx = omega.grid().dx();
    const std::size_t m = omega.size() - 1;
    const double scale = std::max(max_abs(omega.values()), 1e-300);
    if (std::abs(omega[0]) > 1e-12 * scale || std::abs(omega[m]) > 1e-12 * scale)
      throw InvalidSpec("measurement weights: omega must vanish on the boundary");
    const double d_left = (-3.0 * omega[0] + 4.0 * omega[1] - omega[2]) / (2.0 * dx);
    const double d_right = (3.0 * omega[m] - 4.0 * omega[m - 1] + omega[m - 2]) / (2.0 * dx);
    const double tol = 1000.0 * dx * dx * scale;
    if (std::abs(d_left) > tol || std::abs(d_right) > tol)
      throw InvalidSpec("measurement weights: omega' must vanish on the boundary");
  }
};

namespace detail {

inline double face(const SpaceField& a, std::size_t i, std::size_t j) { return 0.5 * (a[i] + a[j]); }

// Interior value of (a u')' at node i.
inline double interior_A(const SpaceField& a, std::span<const double> u, std::size_t i, double inv_dx2) {
  return (face(a, i, i + 1) * (u[i + 1] - u[i]) - face(a, i, i - 1) * (u[i] - u[i - 1])) * inv_dx2;
}

}  // namespace detail

/// Conservative three-point stencil inside; at the endpoints the value is
/// extrapolated linearly from the two nearest interior nodes (second order).
inline void apply_A(const Coefficients& c, std::span<const double> u, std::span<double> out) {
  const std::size_t m = u.size() - 1;
  const double dx = c.a.grid().dx();
  const double inv_dx2 = 1.0 / (dx * dx);
  for (std::size_t i = 1; i < m; ++i) out[i] = detail::interior_A(c.a, u, i, inv_dx2);
  out[0] = 2.0 * out[1] - out[2];
  out[m] = 2.0 * out[m - 1] - out[m - 2];
}

inline SpaceField apply_A(const Coefficients& c, const SpaceField& u) {
  c.a.check_same(u);
  SpaceField out(u.grid());
  apply_A(c, u.values(), out.values());
  return out;
}

inline BoundaryPair<double> apply_B(const Coefficients& c, std::span<const double> u, double dx) {
  const std::size_t m = u.size() - 1;
  const double d_left = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx);
  const double d_right = (3.0 * u[m] - 4.0 * u[m - 1] + u[m - 2]) / (2.0 * dx);
  return {c.b1_left * d_left + c.b0_left * u[0], c.b1_right * d_right + c.b0_right * u[m]};
}

inline BoundaryPair<double> apply_B(const Coefficients& c, const SpaceField& u) {
  return apply_B(c, u.values(), u.grid().dx());
}

/// M(u) = int omega1 u dx + omega2(0) u(0) + omega2(1) u(1).
inline double measure_M(const MeasurementWeights& w, std::span<const double> u, double dx) {
  return inner_space(w.omega1.values(), u, dx) + w.omega2_left * u.front() + w.omega2_right * u.back();
}

inline double measure_M(const MeasurementWeights& w, const SpaceField& u_interior, double trace_left, double trace_right) {
  return inner_space(w.omega1.values(), u_interior.values(), u_interior.grid().dx()) + w.omega2_left * trace_left +
         w.omega2_right * trace_right;
}

inline double measure_Phi(const MeasurementWeights& w, std::span<const double> u, double dx) {
  return inner_space(w.omega.values(), u, dx);
}

inline double measure_Phi(const MeasurementWeights& w, const SpaceField& u) {
  w.omega.check_same(u);
  return measure_Phi(w, u.values(), u.grid().dx());
}

/// psi1 = chi * A omega (A is formally self-adjoint for real a in 1-D).
inline SpaceField assemble_psi1(const Coefficients& c, const MeasurementWeights& w, double chi) {
  w.validate();
  return chi * apply_A(c, w.omega);
}

/// |(omega, A v) - (A omega, v)| with trapezoid pairings.
inline double adjoint_residual(const Coefficients& c, const MeasurementWeights& w, const SpaceField& v) {
  w.validate();
  const SpaceField av = apply_A(c, v);
  const SpaceField aw = apply_A(c, w.omega);
  return std::abs(inner_space(w.omega, av) - inner_space(aw, v));
}

/// Matrix of one implicit step
///   interior: u_i - dt*kappa*(A u)_i
///   boundary: kappa*(B u) + u
/// where kappa = 1 + dt*h(0)/2 folds the implicit trapezoid endpoint of the
/// memory term. The second-order boundary rows reach one node further than a
/// tridiagonal band; that entry is eliminated against the adjacent interior
/// row before the Thomas sweep.
class StepSystem {
 public:
  StepSystem(const Coefficients& c, double dt, double kappa) {
    c.validate();
    const std::size_t n = c.a.size();
    const std::size_t m = n - 1;
    const double dx = c.a.grid().dx();
    const double r = dt * kappa / (dx * dx);
    lower_.assign(n, 0.0);
    diag_.assign(n, 0.0);
    upper_.assign(n, 0.0);
    for (std::size_t i = 1; i < m; ++i) {
      const double fw = detail::face(c.a, i, i + 1);
      const double bw = detail::face(c.a, i, i - 1);
      lower_[i] = -r * bw;
      diag_[i] = 1.0 + r * (fw + bw);
      upper_[i] = -r * fw;
    }
    const double g = kappa / (2.0 * dx);
    // left row on (u0, u1, u2)
    diag_[0] = -3.0 * g * c.b1_left + kappa * c.b0_left + 1.0;
    upper_[0] = 4.0 * g * c.b1_left;
    extra_left_ = -g * c.b1_left;
    // right row on (u_{m-2}, u_{m-1}, u_m)
    diag_[m] = 3.0 * g * c.b1_right + kappa * c.b0_right + 1.0;
    lower_[m] = -4.0 * g * c.b1_right;
    extra_right_ = g * c.b1_right;

    // eliminate u2 from row 0 with row 1, u_{m-2} from row m with row m-1
    left_factor_ = extra_left_ / upper_[1];
    diag_[0] -= left_factor_ * lower_[1];
    upper_[0] -= left_factor_ * diag_[1];
    right_factor_ = extra_right_ / lower_[m - 1];
    diag_[m] -= right_factor_ * upper_[m - 1];
    lower_[m] -= right_factor_ * diag_[m - 1];

    // Thomas factorization
    cprime_.assign(n, 0.0);
    denom_.assign(n, 0.0);
    denom_[0] = diag_[0];
    if (std::abs(denom_[0]) < 1e-300) throw LinearSolveFailure("StepSystem: zero pivot at row 0");
    cprime_[0] = upper_[0] / denom_[0];
    for (std::size_t i = 1; i < n; ++i) {
      denom_[i] = diag_[i] - lower_[i] * cprime_[i - 1];
      if (!(std::abs(denom_[i]) > 1e-300)) throw LinearSolveFailure("StepSystem: zero pivot");
      cprime_[i] = upper_[i] / denom_[i];
    }
  }

  /// rhs holds interior right-hand sides and the two boundary values; solved in place.
  void solve(std::span<double> rhs) const {
    const std::size_t n = diag_.size();
    const std::size_t m = n - 1;
    rhs[0] -= left_factor_ * rhs[1];
    rhs[m] -= right_factor_ * rhs[m - 1];
    rhs[0] /= denom_[0];
    for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] - lower_[i] * rhs[i - 1]) / denom_[i];
    for (std::size_t i = m; i-- > 0;) rhs[i] -= cprime_[i] * rhs[i + 1];
  }

 private:
  std::vector<double> lower_, diag_, upper_, cprime_, denom_;
  double extra_left_ = 0.0, extra_right_ = 0.0;
  double left_factor_ = 0.0, right_factor_ = 0.0;
};

}  // namespace thermemo
