#pragma once

// Rate-independent memory operators over sampled inputs: generalized play,
// Preisach (finite relay grid) and an affine scaled identity. Inputs are
// piecewise linear between nodes; every operator is causal and advances one
// node at a time through an explicit state object.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "thermemo/error.hpp"
#include "thermemo/grid.hpp"

namespace thermemo {

struct PlaySpec {
  double half_width = 0.0;
  double initial_output = 0.0;
};

/// Bistable relay: switches up when input >= up, down when input <= down.
struct Relay {
  double down = -1.0;
  double up = 1.0;
  double weight = 1.0;
  int initial_state = -1;
};

struct PreisachSpec {
  std::vector<Relay> relays;

  double total_mass() const {
    double m = 0.0;
    for (const auto& r : relays) m += r.weight;
    return m;
  }

  /// Smallest gap between distinct threshold values.
  double resolution() const {
    std::vector<double> t;
    for (const auto& r : relays) {
      t.push_back(r.down);
      t.push_back(r.up);
    }
    std::sort(t.begin(), t.end());
    double gap = HUGE_VAL;
    for (std::size_t k = 1; k < t.size(); ++k)
      if (t[k] > t[k - 1]) gap = std::min(gap, t[k] - t[k - 1]);
    return gap;
  }

  /// All threshold pairs down < up on `levels` equispaced values in [lo, hi],
  /// sharing `mass` uniformly.
  static PreisachSpec uniform_grid(double lo, double hi, std::size_t levels, double mass, int initial_state = -1) {
    if (levels < 2 || !(hi > lo)) throw InvalidSpec("preisach grid: need levels >= 2 and hi > lo");
    PreisachSpec s;
    const double step = (hi - lo) / static_cast<double>(levels - 1);
    for (std::size_t i = 0; i < levels; ++i)
      for (std::size_t j = i + 1; j < levels; ++j)
        s.relays.push_back({lo + step * static_cast<double>(i), lo + step * static_cast<double>(j), 0.0, initial_state});
    for (auto& r : s.relays) r.weight = mass / static_cast<double>(s.relays.size());
    return s;
  }
};

/// W(x)_n = initial_output + gain * (x_n - x_0).
struct ScaledIdentitySpec {
  double gain = 1.0;
  double initial_output = 0.0;
};

using MemoryOperatorSpec = std::variant<PlaySpec, PreisachSpec, ScaledIdentitySpec>;

inline std::string kind_name(const MemoryOperatorSpec& spec) {
  struct {
    std::string operator()(const PlaySpec&) const { return "play"; }
    std::string operator()(const PreisachSpec&) const { return "preisach"; }
    std::string operator()(const ScaledIdentitySpec&) const { return "scaled_identity"; }
  } v;
  return std::visit(v, spec);
}

inline void validate(const MemoryOperatorSpec& spec) {
  if (const auto* p = std::get_if<PlaySpec>(&spec)) {
    if (!(p->half_width >= 0.0) || !std::isfinite(p->half_width)) throw InvalidSpec("play: half_width must be >= 0");
    if (!std::isfinite(p->initial_output)) throw InvalidSpec("play: initial output must be finite");
  } else if (const auto* q = std::get_if<PreisachSpec>(&spec)) {
    if (q->relays.empty()) throw InvalidSpec("preisach: no relays");
    for (const auto& r : q->relays) {
      if (!(r.down < r.up)) throw InvalidSpec("preisach: relay thresholds must satisfy down < up");
      if (!(r.weight >= 0.0)) throw InvalidSpec("preisach: relay weights must be >= 0");
      if (r.initial_state != 1 && r.initial_state != -1) throw InvalidSpec("preisach: relay state must be +1 or -1");
    }
  } else if (const auto* s = std::get_if<ScaledIdentitySpec>(&spec)) {
    if (!std::isfinite(s->gain) || !std::isfinite(s->initial_output)) throw InvalidSpec("scaled_identity: non-finite parameter");
  }
}

/// Lipschitz constant in the sup norm. For the Preisach relay grid this is the
/// effective bound 2*mass/resolution, valid for input pairs at least one
/// resolution apart (a finite relay sum jumps, so no bound holds below that).
/// The scaled identity measures increments from x_0, so inputs with different
/// starting values can differ by twice the input distance.
inline double declared_lipschitz(const MemoryOperatorSpec& spec) {
  if (std::holds_alternative<PlaySpec>(spec)) return 1.0;
  if (const auto* s = std::get_if<ScaledIdentitySpec>(&spec)) return 2.0 * std::abs(s->gain);
  const auto& p = std::get<PreisachSpec>(spec);
  return 2.0 * p.total_mass() / p.resolution();
}

/// Incremental evaluation: the first call to step() consumes node 0.
class MemoryState {
 public:
  explicit MemoryState(MemoryOperatorSpec spec) : spec_(std::move(spec)) {
    validate(spec_);
    if (const auto* p = std::get_if<PlaySpec>(&spec_)) {
      output_ = p->initial_output;
    } else if (const auto* q = std::get_if<PreisachSpec>(&spec_)) {
      states_.reserve(q->relays.size());
      for (const auto& r : q->relays) states_.push_back(r.initial_state);
    } else {
      output_ = std::get<ScaledIdentitySpec>(spec_).initial_output;
    }
  }

  double step(double x) {
    if (const auto* p = std::get_if<PlaySpec>(&spec_)) {
      const double clamped = std::min(std::max(output_, x - p->half_width), x + p->half_width);
      if (!started_ && clamped != output_) clamped_initial_ = true;
      output_ = clamped;
    } else if (const auto* q = std::get_if<PreisachSpec>(&spec_)) {
      double acc = 0.0;
      for (std::size_t k = 0; k < states_.size(); ++k) {
        const Relay& r = q->relays[k];
        if (x >= r.up) {
          states_[k] = 1;
        } else if (x <= r.down) {
          states_[k] = -1;
        }
        acc += r.weight * static_cast<double>(states_[k]);
      }
      output_ = acc;
    } else {
      const auto& s = std::get<ScaledIdentitySpec>(spec_);
      if (!started_) first_input_ = x;
      output_ = s.initial_output + s.gain * (x - first_input_);
    }
    started_ = true;
    return output_;
  }

  double output() const { return output_; }
  bool started() const { return started_; }
  /// True when a play operator's initial output had to be projected onto
  /// [x0 - r, x0 + r].
  bool clamped_initial() const { return clamped_initial_; }
  const MemoryOperatorSpec& spec() const { return spec_; }

 private:
  MemoryOperatorSpec spec_;
  std::vector<int> states_;
  double output_ = 0.0;
  double first_input_ = 0.0;
  bool started_ = false;
  bool clamped_initial_ = false;
};

inline TimeSeries w_apply(const MemoryOperatorSpec& spec, const TimeSeries& input) {
  MemoryState state(spec);
  TimeSeries out(input.grid());
  for (std::size_t n = 0; n < input.size(); ++n) {
    if (!std::isfinite(input[n])) throw InvalidSpec("w_apply: non-finite input");
    out[n] = state.step(input[n]);
  }
  return out;
}

inline TimeSeries w_apply_prefix(const MemoryOperatorSpec& spec, const TimeSeries& input, std::size_t m) {
  if (m >= input.size()) throw IndexOutOfRange("w_apply_prefix: index out of range");
  return w_apply(spec, input.prefix(m));
}

/// sup|W(x1) - W(x2)| / sup|x1 - x2|, or 0 for identical inputs.
inline double lipschitz_probe(const MemoryOperatorSpec& spec, const TimeSeries& x1, const TimeSeries& x2) {
  x1.check_same(x2);
  double din = 0.0;
  for (std::size_t n = 0; n < x1.size(); ++n) din = std::max(din, std::abs(x1[n] - x2[n]));
  if (din == 0.0) return 0.0;
  const TimeSeries w1 = w_apply(spec, x1);
  const TimeSeries w2 = w_apply(spec, x2);
  double dout = 0.0;
  for (std::size_t n = 0; n < w1.size(); ++n) dout = std::max(dout, std::abs(w1[n] - w2[n]));
  return dout / din;
}

}  // namespace thermemo
