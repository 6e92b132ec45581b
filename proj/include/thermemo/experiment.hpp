#pragma once

// Round-trip experiments: synthesize g with a known kernel on a fine grid,
// restrict it to the inversion grid, optionally perturb it, invert, and
// compare against the truth.

#include <cmath>
#include <cstdint>
#include <random>

#include "thermemo/forward_solver.hpp"
#include "thermemo/grid.hpp"
#include "thermemo/inverse_solver.hpp"
#include "thermemo/scenario.hpp"

namespace thermemo {

/// g + U(-amplitude, amplitude) per node, reproducible from the seed.
inline TimeSeries inject_noise(const TimeSeries& g, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0)) throw InvalidSpec("inject_noise: amplitude must be >= 0");
  if (amplitude == 0.0) return g;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  TimeSeries out = g;
  for (std::size_t n = 0; n < out.size(); ++n) out[n] += dist(rng);
  return out;
}

inline double relative_l2(const TimeSeries& approx, const TimeSeries& exact) {
  return l2_time(approx - exact) / l2_time(exact);
}

inline double relative_l2(const SpaceTimeField& approx, const SpaceTimeField& exact) {
  SpaceTimeField diff(exact.tgrid(), exact.sgrid());
  for (std::size_t n = 0; n < exact.rows(); ++n)
    for (std::size_t i = 0; i < exact.cols(); ++i) diff.at(n, i) = approx.at(n, i) - exact.at(n, i);
  return l2_space_time(diff) / l2_space_time(exact);
}

struct RoundTripSettings {
  std::size_t steps = 400;   // inversion grid
  std::size_t cells = 100;
  std::size_t refine = 2;    // data grid = refine x inversion grid
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::size_t smoothing_window = 1;
  SolverControls controls;
};

struct RoundTripResult {
  ForwardResult forward;       // fine grid
  TimeSeries g_fine;
  TimeSeries g;                // restricted (and possibly perturbed) data
  InverseProblem problem;
  InverseCoefficients coeffs;
  InverseResult inverse;
  SpaceTimeField u;            // reconstructed on the inversion grid
  SpaceTimeField u_true;       // forward solution restricted to the inversion grid
  TimeSeries h_true;
  double abs_l2_h = 0.0;
  double rel_l2_h = 0.0;
  double rel_l2_u = 0.0;
  Problem2Residuals residuals;
};

inline RoundTripResult run_roundtrip(const Scenario& s, const RoundTripSettings& rt) {
  RoundTripResult r;
  const TimeGrid tg(s.t_end, rt.steps);
  const SpaceGrid sg(rt.cells);
  const TimeGrid tg_fine(s.t_end, rt.steps * rt.refine);
  const SpaceGrid sg_fine(rt.cells * rt.refine);

  r.forward = forward_solve(make_forward_problem(s, tg_fine, sg_fine), rt.controls);
  r.g_fine = emit_measurement(r.forward.u, sample_weights(s, sg_fine));
  r.g = inject_noise(restrict_to(r.g_fine, tg), rt.noise, rt.seed);

  r.problem = make_inverse_problem(s, sg, r.g, rt.smoothing_window);
  r.coeffs = assemble_coefficients(r.problem, rt.controls.tol_chi);
  r.inverse = inverse_march(r.problem, r.coeffs, rt.controls);
  r.u = reconstruct_u(r.problem.u0, r.inverse.v);
  r.u_true = restrict_to(r.forward.u, tg, sg);
  r.h_true = s.kernel.sample(tg);
  r.abs_l2_h = l2_time(r.inverse.h - r.h_true);
  r.rel_l2_h = l2_time(r.inverse.h - r.h_true) / std::max(l2_time(r.h_true), 1e-300);
  r.rel_l2_u = relative_l2(r.u, r.u_true);
  r.residuals = residual_problem2(r.u, r.inverse.v, r.inverse.h, r.problem);
  return r;
}

}  // namespace thermemo
