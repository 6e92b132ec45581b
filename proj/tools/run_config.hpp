#pragma once

// JSON run configuration: a preset plus optional overrides, grids, data
// handling and solver controls. Every field has a default, so the echoed
// (normalized) document fully determines a run.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "thermemo/error.hpp"
#include "thermemo/functions.hpp"
#include "thermemo/hysteresis.hpp"
#include "thermemo/report.hpp"
#include "thermemo/scenario.hpp"

namespace thermemo::cli {

using nlohmann::json;

enum class Mode { forward, invert, roundtrip, verify, bench };

inline Mode parse_mode(const std::string& s) {
  if (s == "forward") return Mode::forward;
  if (s == "invert") return Mode::invert;
  if (s == "roundtrip") return Mode::roundtrip;
  if (s == "verify") return Mode::verify;
  if (s == "bench") return Mode::bench;
  throw ConfigError("unknown mode '" + s + "' (expected forward, invert, roundtrip, verify or bench)");
}

inline std::string mode_name(Mode m) {
  switch (m) {
    case Mode::forward: return "forward";
    case Mode::invert: return "invert";
    case Mode::roundtrip: return "roundtrip";
    case Mode::verify: return "verify";
    case Mode::bench: return "bench";
  }
  return "?";
}

struct RunConfig {
  Mode mode = Mode::roundtrip;
  std::string preset = "exp_kernel";
  json model = json::object();  // overrides applied on top of the preset

  std::size_t steps = 400;
  std::size_t cells = 100;
  std::optional<double> t_end;  // preset value when absent

  std::size_t refine = 2;
  std::string g_csv;
  std::string kernel_csv;
  double noise = 0.0;
  std::optional<std::uint64_t> seed;
  std::size_t smoothing_window = 1;

  SolverControls controls;
  std::string output = "out";
};

namespace detail {

inline const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline void reject_unknown(const json& j, const std::vector<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const auto& k : known) ok = ok || k == key;
    if (!ok) throw ConfigError(where + ": unknown field '" + key + "'");
  }
}

inline std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(where + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

inline std::size_t count(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(where + ": expected a non-negative integer");
  return j.get<std::size_t>();
}

}  // namespace detail

/// Time functions:
///   3.5
///   {"kind": "const", "value": c}
///   {"kind": "poly", "coeffs": [c0, c1, ...]}
///   {"kind": "sin", "amp": a, "freq": w, "phase": p, "offset": o}
///   {"kind": "exp", "offset": o, "amps": [...], "rates": [...]}
inline TimeFunction parse_time_function(const json& j, const std::string& where) {
  using detail::number;
  if (j.is_number()) return TimeFunction::constant(j.get<double>());
  if (!j.is_object()) throw ConfigError(where + ": expected a number or a function object");
  const std::string kind = detail::require(j, "kind", where).get<std::string>();
  auto opt = [&](const char* key, double dflt) { return j.contains(key) ? number(j.at(key), where + "." + key) : dflt; };
  if (kind == "const") {
    detail::reject_unknown(j, {"kind", "value"}, where);
    return TimeFunction::constant(number(detail::require(j, "value", where), where + ".value"));
  }
  if (kind == "poly") {
    detail::reject_unknown(j, {"kind", "coeffs"}, where);
    return TimeFunction::poly(detail::number_list(detail::require(j, "coeffs", where), where + ".coeffs"));
  }
  if (kind == "sin") {
    detail::reject_unknown(j, {"kind", "amp", "freq", "phase", "offset"}, where);
    return TimeFunction::sine(opt("amp", 1.0), opt("freq", 1.0), opt("phase", 0.0), opt("offset", 0.0));
  }
  if (kind == "exp") {
    detail::reject_unknown(j, {"kind", "offset", "amps", "rates"}, where);
    return TimeFunction::exponentials(opt("offset", 0.0),
                                      detail::number_list(detail::require(j, "amps", where), where + ".amps"),
                                      detail::number_list(detail::require(j, "rates", where), where + ".rates"));
  }
  throw ConfigError(where + ": unknown time function kind '" + kind + "'");
}

/// Space functions on [0, 1]:
///   2.0
///   {"kind": "poly", "coeffs": [...]}
///   {"kind": "fourier", "mean": c, "cos": [...], "sin": [...]}   (frequencies k pi)
///   {"kind": "bump", "scale": s}                                 (s x^2 (1-x)^2)
///   {"kind": "waves", "poly": [...], "waves": [{"amp", "freq", "phase"}, ...]}
inline SpaceFunction parse_space_function(const json& j, const std::string& where) {
  using detail::number;
  if (j.is_number()) return SpaceFunction::constant(j.get<double>());
  if (!j.is_object()) throw ConfigError(where + ": expected a number or a function object");
  const std::string kind = detail::require(j, "kind", where).get<std::string>();
  if (kind == "poly") {
    detail::reject_unknown(j, {"kind", "coeffs"}, where);
    return SpaceFunction::poly(detail::number_list(detail::require(j, "coeffs", where), where + ".coeffs"));
  }
  if (kind == "fourier") {
    detail::reject_unknown(j, {"kind", "mean", "cos", "sin"}, where);
    return SpaceFunction::fourier(j.contains("mean") ? number(j.at("mean"), where + ".mean") : 0.0,
                                  j.contains("cos") ? detail::number_list(j.at("cos"), where + ".cos") : std::vector<double>{},
                                  j.contains("sin") ? detail::number_list(j.at("sin"), where + ".sin") : std::vector<double>{});
  }
  if (kind == "bump") {
    detail::reject_unknown(j, {"kind", "scale"}, where);
    return SpaceFunction::bump(j.contains("scale") ? number(j.at("scale"), where + ".scale") : 1.0);
  }
  if (kind == "waves") {
    detail::reject_unknown(j, {"kind", "poly", "waves"}, where);
    SpaceFunction f;
    if (j.contains("poly")) f.poly_coeffs = detail::number_list(j.at("poly"), where + ".poly");
    if (j.contains("waves")) {
      for (const auto& w : j.at("waves")) {
        detail::reject_unknown(w, {"amp", "freq", "phase"}, where + ".waves");
        f.waves.push_back({w.contains("amp") ? number(w.at("amp"), where) : 1.0,
                           w.contains("freq") ? number(w.at("freq"), where) : 0.0,
                           w.contains("phase") ? number(w.at("phase"), where) : 0.0});
      }
    }
    return f;
  }
  throw ConfigError(where + ": unknown space function kind '" + kind + "'");
}

/// Memory operator:
///   {"kind": "play", "half_width": r, "initial_output": w0}        (w0 omitted: M(u0))
///   {"kind": "preisach", "grid": {"lo", "hi", "levels", "mass", "initial_state"}}
///   {"kind": "preisach", "relays": [[down, up, weight, state], ...]}
///   {"kind": "scaled_identity", "gain": g, "initial_output": w0}   (w0 omitted: M(u0))
inline MemoryOperatorSpec parse_memory(const json& j, const std::string& where) {
  using detail::number;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::string kind = detail::require(j, "kind", where).get<std::string>();
  auto initial = [&] { return j.contains("initial_output") ? number(j.at("initial_output"), where) : nan; };
  if (kind == "play") {
    detail::reject_unknown(j, {"kind", "half_width", "initial_output"}, where);
    return PlaySpec{number(detail::require(j, "half_width", where), where + ".half_width"), initial()};
  }
  if (kind == "scaled_identity") {
    detail::reject_unknown(j, {"kind", "gain", "initial_output"}, where);
    return ScaledIdentitySpec{j.contains("gain") ? number(j.at("gain"), where + ".gain") : 1.0, initial()};
  }
  if (kind == "preisach") {
    detail::reject_unknown(j, {"kind", "grid", "relays"}, where);
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      detail::reject_unknown(g, {"lo", "hi", "levels", "mass", "initial_state"}, where + ".grid");
      const int state = g.contains("initial_state") ? g.at("initial_state").get<int>() : -1;
      return PreisachSpec::uniform_grid(number(detail::require(g, "lo", where), where + ".grid.lo"),
                                        number(detail::require(g, "hi", where), where + ".grid.hi"),
                                        detail::count(detail::require(g, "levels", where), where + ".grid.levels"),
                                        number(detail::require(g, "mass", where), where + ".grid.mass"), state);
    }
    PreisachSpec s;
    for (const auto& r : detail::require(j, "relays", where)) {
      const auto v = detail::number_list(r, where + ".relays");
      if (v.size() != 3 && v.size() != 4) throw ConfigError(where + ".relays: expected [down, up, weight(, state)]");
      s.relays.push_back({v[0], v[1], v[2], v.size() == 4 ? static_cast<int>(v[3]) : -1});
    }
    return s;
  }
  throw ConfigError(where + ": unknown memory operator kind '" + kind + "'");
}

namespace detail {

inline BoundaryPair<TimeFunction> boundary_time(const json& j, const std::string& where) {
  if (j.is_object() && (j.contains("left") || j.contains("right"))) {
    reject_unknown(j, {"left", "right"}, where);
    return {parse_time_function(require(j, "left", where), where + ".left"),
            parse_time_function(require(j, "right", where), where + ".right")};
  }
  const TimeFunction f = parse_time_function(j, where);
  return {f, f};
}

inline std::pair<double, double> pair_of(const json& j, const std::string& where) {
  const auto v = number_list(j, where);
  if (v.size() != 2) throw ConfigError(where + ": expected [left, right]");
  return {v[0], v[1]};
}

}  // namespace detail

/// Preset with the "model" overrides applied.
inline Scenario build_scenario(const RunConfig& cfg) {
  Scenario s = presets::by_name(cfg.preset);
  const json& m = cfg.model;
  detail::reject_unknown(m,
                         {"t_end", "a", "b1", "b0", "u0", "omega", "omega1", "omega2", "epsilon", "phi0", "u_c", "u_a",
                          "u_b", "q", "f", "memory", "kernel"},
                         "model");
  if (m.contains("t_end")) s.t_end = detail::number(m.at("t_end"), "model.t_end");
  if (m.contains("a")) s.a = parse_space_function(m.at("a"), "model.a");
  if (m.contains("b1")) std::tie(s.b1_left, s.b1_right) = detail::pair_of(m.at("b1"), "model.b1");
  if (m.contains("b0")) std::tie(s.b0_left, s.b0_right) = detail::pair_of(m.at("b0"), "model.b0");
  if (m.contains("u0")) s.u0 = parse_space_function(m.at("u0"), "model.u0");
  if (m.contains("omega")) s.omega = parse_space_function(m.at("omega"), "model.omega");
  if (m.contains("omega1")) s.omega1 = parse_space_function(m.at("omega1"), "model.omega1");
  if (m.contains("omega2")) std::tie(s.omega2_left, s.omega2_right) = detail::pair_of(m.at("omega2"), "model.omega2");
  if (m.contains("epsilon")) s.epsilon = detail::number(m.at("epsilon"), "model.epsilon");
  if (m.contains("phi0")) s.phi0 = detail::number(m.at("phi0"), "model.phi0");
  if (m.contains("u_c")) s.u_c = parse_time_function(m.at("u_c"), "model.u_c");
  if (m.contains("u_a")) s.u_a = detail::boundary_time(m.at("u_a"), "model.u_a");
  if (m.contains("u_b")) s.u_b = detail::boundary_time(m.at("u_b"), "model.u_b");
  if (m.contains("q")) s.q = detail::boundary_time(m.at("q"), "model.q");
  if (m.contains("f")) {
    s.f.terms.clear();
    for (const auto& term : m.at("f")) {
      detail::reject_unknown(term, {"time", "space"}, "model.f");
      s.f.terms.push_back({parse_time_function(detail::require(term, "time", "model.f"), "model.f.time"),
                           parse_space_function(detail::require(term, "space", "model.f"), "model.f.space")});
    }
  }
  if (m.contains("memory")) s.memory = parse_memory(m.at("memory"), "model.memory");
  if (m.contains("kernel")) s.kernel = parse_time_function(m.at("kernel"), "model.kernel");
  if (cfg.t_end) s.t_end = *cfg.t_end;
  if (!(s.t_end > 0.0)) throw ConfigError("grid.t_end must be positive");
  s.exact_u = nullptr;  // overrides invalidate closed-form solutions
  if (m.empty() && !cfg.t_end) s.exact_u = presets::by_name(cfg.preset).exact_u;
  return s;
}

inline RunConfig parse_config(const json& j) {
  using detail::count;
  using detail::number;
  detail::reject_unknown(j, {"mode", "preset", "model", "grid", "data", "solver", "output"}, "config");
  RunConfig c;
  if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
  if (j.contains("preset")) c.preset = j.at("preset").get<std::string>();
  if (j.contains("model")) c.model = j.at("model");
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    detail::reject_unknown(g, {"steps", "cells", "t_end"}, "grid");
    if (g.contains("steps")) c.steps = count(g.at("steps"), "grid.steps");
    if (g.contains("cells")) c.cells = count(g.at("cells"), "grid.cells");
    if (g.contains("t_end")) c.t_end = number(g.at("t_end"), "grid.t_end");
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    detail::reject_unknown(d, {"refine", "g_csv", "kernel_csv", "noise", "smoothing_window"}, "data");
    if (d.contains("refine")) c.refine = count(d.at("refine"), "data.refine");
    if (d.contains("g_csv")) c.g_csv = d.at("g_csv").get<std::string>();
    if (d.contains("kernel_csv")) c.kernel_csv = d.at("kernel_csv").get<std::string>();
    if (d.contains("smoothing_window")) c.smoothing_window = count(d.at("smoothing_window"), "data.smoothing_window");
    if (d.contains("noise")) {
      const json& n = d.at("noise");
      detail::reject_unknown(n, {"amplitude", "seed"}, "data.noise");
      if (n.contains("amplitude")) c.noise = number(n.at("amplitude"), "data.noise.amplitude");
      if (n.contains("seed") && !n.at("seed").is_null()) {
        if (!n.at("seed").is_number_unsigned()) throw ConfigError("data.noise.seed: expected a non-negative integer");
        c.seed = n.at("seed").get<std::uint64_t>();
      }
    }
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    detail::reject_unknown(s, {"tol_picard", "max_picard", "window_steps", "strict", "tol_chi"}, "solver");
    if (s.contains("tol_picard")) c.controls.tol_picard = number(s.at("tol_picard"), "solver.tol_picard");
    if (s.contains("max_picard")) c.controls.max_picard = count(s.at("max_picard"), "solver.max_picard");
    if (s.contains("window_steps")) c.controls.window_steps = count(s.at("window_steps"), "solver.window_steps");
    if (s.contains("strict")) c.controls.strict = s.at("strict").get<bool>();
    if (s.contains("tol_chi")) c.controls.tol_chi = number(s.at("tol_chi"), "solver.tol_chi");
  }
  if (j.contains("output")) c.output = j.at("output").get<std::string>();
  return c;
}

/// Checks that do not need the model itself.
inline void validate(const RunConfig& c) {
  if (c.steps < 2) throw ConfigError("grid.steps must be >= 2");
  if (c.cells < 4) throw ConfigError("grid.cells must be >= 4");
  if (c.refine < 1) throw ConfigError("data.refine must be >= 1");
  if (c.smoothing_window < 1) throw ConfigError("data.smoothing_window must be >= 1");
  if (!(c.noise >= 0.0) || !std::isfinite(c.noise)) throw ConfigError("data.noise.amplitude must be >= 0");
  if (c.noise > 0.0 && !c.seed) throw ConfigError("data.noise.seed is required when data.noise.amplitude > 0");
  if (!(c.controls.tol_picard > 0.0)) throw ConfigError("solver.tol_picard must be positive");
  if (c.controls.max_picard < 1) throw ConfigError("solver.max_picard must be >= 1");
  if (c.controls.window_steps < 1) throw ConfigError("solver.window_steps must be >= 1");
  if (!(c.controls.tol_chi >= 0.0)) throw ConfigError("solver.tol_chi must be >= 0");
  if (c.mode == Mode::invert && c.g_csv.empty()) throw ConfigError("invert mode requires data.g_csv");
  if (!c.kernel_csv.empty() && c.mode != Mode::forward) throw ConfigError("data.kernel_csv is only used in forward mode");
  presets::by_name(c.preset);
}

/// Normalized echo: every field explicit, so the echo re-runs identically.
inline json to_json(const RunConfig& c) {
  json j;
  j["mode"] = mode_name(c.mode);
  j["preset"] = c.preset;
  j["model"] = c.model;
  j["grid"] = {{"steps", c.steps}, {"cells", c.cells}};
  if (c.t_end) j["grid"]["t_end"] = *c.t_end;
  j["data"] = {{"refine", c.refine}, {"smoothing_window", c.smoothing_window}};
  if (!c.g_csv.empty()) j["data"]["g_csv"] = c.g_csv;
  if (!c.kernel_csv.empty()) j["data"]["kernel_csv"] = c.kernel_csv;
  j["data"]["noise"] = {{"amplitude", c.noise}};
  j["data"]["noise"]["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  j["solver"] = {{"tol_picard", c.controls.tol_picard},
                 {"max_picard", c.controls.max_picard},
                 {"window_steps", c.controls.window_steps},
                 {"strict", c.controls.strict},
                 {"tol_chi", c.controls.tol_chi}};
  j["output"] = c.output;
  return j;
}

}  // namespace thermemo::cli
