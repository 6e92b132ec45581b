#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace thermemo {

struct SolverControls {
  double tol_picard = 1e-10;
  std::size_t max_picard = 50;
  std::size_t window_steps = 1;
  bool strict = false;
  double tol_chi = 1e-10;
};

/// Diagnostics of one solver run.
struct RunReport {
  std::vector<std::size_t> iterations;            // per step, or per window in windowed mode
  std::vector<std::vector<double>> update_history;  // relative Picard updates per step/window
  double wall_seconds = 0.0;
  std::map<std::string, double> metrics;
  std::vector<std::string> warnings;

  std::size_t max_iterations() const {
    return iterations.empty() ? 0 : *std::max_element(iterations.begin(), iterations.end());
  }

  /// True when every update history decreases strictly after its first `skip` entries.
  bool monotone_after(std::size_t skip) const {
    for (const auto& h : update_history)
      for (std::size_t k = skip + 1; k < h.size(); ++k)
        if (h[k] > h[k - 1] && h[k] > 1e-14) return false;
    return true;
  }
};

}  // namespace thermemo
