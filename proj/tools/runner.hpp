#pragma once

// Mode dispatch for the command-line runner. Artifacts go to cfg.output;
// every mode writes report.json with the normalized config echo.

#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "run_config.hpp"
#include "thermemo/experiment.hpp"
#include "thermemo/io.hpp"
#include "thermemo/verify.hpp"

namespace thermemo::cli {

enum ExitCode : int { ok = 0, config_error = 2, solver_error = 3, verify_failure = 4 };

namespace detail {

class Artifacts {
 public:
  explicit Artifacts(std::string dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir_ + "': " + ec.message());
  }

  std::string path(const std::string& name) {
    files_.push_back(name);
    return (std::filesystem::path(dir_) / name).string();
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

inline json iterations_json(const RunReport& r) {
  return {{"max", r.max_iterations()}, {"per_step", r.iterations}, {"wall_seconds", r.wall_seconds}};
}

inline json residuals_json(const Problem2Residuals& r) {
  return {{"interior", r.interior},
          {"boundary", r.boundary},
          {"measurement", r.measurement},
          {"derivative_identity", r.derivative_identity}};
}

inline json compatibility_json(const InverseProblem& p) {
  json out = json::array();
  for (const auto& c : check_compatibility(p)) out.push_back({{"condition", c.condition}, {"residual", c.residual}});
  return out;
}

inline void append_warnings(json& report, const RunReport& r) {
  for (const auto& w : r.warnings) report["warnings"].push_back(w);
}

inline void write_report(Artifacts& art, json report, const RunConfig& cfg) {
  report["mode"] = mode_name(cfg.mode);
  report["config"] = to_json(cfg);
  const std::string path = art.path("report.json");
  report["artifacts"] = art.files();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << report.dump(2) << '\n';
}

inline TimeGrid time_grid(const RunConfig& cfg, const Scenario& s) { return TimeGrid(s.t_end, cfg.steps); }

}  // namespace detail

inline int run_forward(const RunConfig& cfg, std::ostream& log) {
  const Scenario s = build_scenario(cfg);
  const TimeGrid tg = detail::time_grid(cfg, s);
  const SpaceGrid sg(cfg.cells);
  ForwardProblem p = make_forward_problem(s, tg, sg);
  if (!cfg.kernel_csv.empty()) {
    p.h = read_time_series_csv(cfg.kernel_csv);
    if (!(p.h.grid() == tg)) throw ConfigError("data.kernel_csv: time grid does not match grid.steps/t_end");
  }
  const ForwardResult r = forward_solve(p, cfg.controls);
  const TimeSeries g = emit_measurement(r.u, p.weights);

  detail::Artifacts art(cfg.output);
  write_csv(art.path("u.csv"), r.u);
  write_csv(art.path("g.csv"), g, "g");
  write_csv(art.path("h.csv"), p.h, "h");
  write_csv(art.path("u_e.csv"), external_temperature(p.thermostat, p.memory, p.weights, r.u));
  json report;
  report["iterations"] = detail::iterations_json(r.report);
  report["metrics"] = {{"g_final", g.back()}, {"l2_u", l2_space_time(r.u)}};
  detail::append_warnings(report, r.report);
  detail::write_report(art, report, cfg);
  log << "forward: " << tg.steps() << " steps, max Picard iterations " << r.report.max_iterations() << '\n';
  return ok;
}

inline int run_invert(const RunConfig& cfg, std::ostream& log) {
  Scenario s = build_scenario(cfg);
  TimeSeries g = read_time_series_csv(cfg.g_csv);
  s.t_end = g.grid().t_end();
  g = inject_noise(g, cfg.noise, cfg.seed.value_or(0));
  const SpaceGrid sg(cfg.cells);
  const InverseProblem p = make_inverse_problem(s, sg, g, cfg.smoothing_window);
  const InverseCoefficients c = assemble_coefficients(p, cfg.controls.tol_chi);
  const InverseResult r = inverse_march(p, c, cfg.controls);
  const SpaceTimeField u = reconstruct_u(p.u0, r.v);

  detail::Artifacts art(cfg.output);
  write_csv(art.path("h.csv"), r.h, "h");
  write_csv(art.path("v.csv"), r.v);
  write_csv(art.path("u.csv"), u);
  write_csv(art.path("g.csv"), g, "g");
  json report;
  report["iterations"] = detail::iterations_json(r.report);
  report["residuals"] = detail::residuals_json(residual_problem2(u, r.v, r.h, p));
  report["compatibility"] = detail::compatibility_json(p);
  report["metrics"] = r.report.metrics;
  detail::append_warnings(report, r.report);
  detail::write_report(art, report, cfg);
  log << "invert: " << g.grid().steps() << " steps, chi = " << c.chi << ", max Picard iterations "
      << r.report.max_iterations() << '\n';
  return ok;
}

inline int run_roundtrip_mode(const RunConfig& cfg, std::ostream& log) {
  const Scenario s = build_scenario(cfg);
  RoundTripSettings rt;
  rt.steps = cfg.steps;
  rt.cells = cfg.cells;
  rt.refine = cfg.refine;
  rt.noise = cfg.noise;
  rt.seed = cfg.seed.value_or(0);
  rt.smoothing_window = cfg.smoothing_window;
  rt.controls = cfg.controls;
  const RoundTripResult r = run_roundtrip(s, rt);

  detail::Artifacts art(cfg.output);
  write_csv(art.path("h.csv"), r.inverse.h, "h");
  write_csv(art.path("h_true.csv"), r.h_true, "h");
  write_csv(art.path("v.csv"), r.inverse.v);
  write_csv(art.path("u.csv"), r.u);
  write_csv(art.path("g.csv"), r.g, "g");
  json report;
  report["errors"] = {{"rel_l2_h", r.rel_l2_h}, {"abs_l2_h", r.abs_l2_h}, {"rel_l2_u", r.rel_l2_u}};
  report["residuals"] = detail::residuals_json(r.residuals);
  report["compatibility"] = detail::compatibility_json(r.problem);
  report["iterations"] = {{"forward", detail::iterations_json(r.forward.report)},
                          {"inverse", detail::iterations_json(r.inverse.report)}};
  report["metrics"] = r.inverse.report.metrics;
  detail::append_warnings(report, r.forward.report);
  detail::append_warnings(report, r.inverse.report);
  detail::write_report(art, report, cfg);
  log << "roundtrip " << s.name << ": rel_l2_h = " << r.rel_l2_h << ", rel_l2_u = " << r.rel_l2_u << '\n';
  return ok;
}

inline int run_verify(const RunConfig& cfg, std::ostream& log) {
  const auto results = run_verify_battery();
  json checks = json::array();
  std::size_t failed = 0;
  for (const auto& r : results) {
    failed += r.passed ? 0 : 1;
    log << (r.passed ? "PASS " : "FAIL ") << r.suite << ": " << r.name << "  (" << r.value << " <= " << r.limit << ")";
    if (!r.error.empty()) log << "  " << r.error;
    log << '\n';
    checks.push_back({{"suite", r.suite},
                      {"name", r.name},
                      {"value", r.value},
                      {"limit", r.limit},
                      {"passed", r.passed},
                      {"error", r.error}});
  }
  log << results.size() - failed << "/" << results.size() << " checks passed\n";
  detail::Artifacts art(cfg.output);
  detail::write_report(art, {{"checks", checks}, {"failed", failed}}, cfg);
  return failed == 0 ? ok : verify_failure;
}

inline int run_bench(const RunConfig& cfg, std::ostream& log) {
  using clock = std::chrono::steady_clock;
  const Scenario s = build_scenario(cfg);
  json rows = json::array();
  std::mt19937_64 rng(cfg.seed.value_or(0));
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (std::size_t n : {100u, 200u, 400u, 800u}) {
    const TimeGrid tg(s.t_end, n);
    const SpaceGrid sg(n / 4);
    const TimeSeries a = TimeSeries::sample(tg, [&](double) { return d(rng); });
    const TimeSeries b = TimeSeries::sample(tg, [&](double) { return d(rng); });

    auto t0 = clock::now();
    const TimeSeries ab = convolve(a, b);
    const double t_conv = std::chrono::duration<double>(clock::now() - t0).count();

    const ForwardProblem fp = make_forward_problem(s, tg, sg);
    const ForwardResult fr = forward_solve(fp, cfg.controls);
    const TimeSeries g = emit_measurement(fr.u, fp.weights);

    t0 = clock::now();
    const InverseProblem ip = make_inverse_problem(s, sg, g, cfg.smoothing_window);
    const InverseResult ir = inverse_march(ip, assemble_coefficients(ip, cfg.controls.tol_chi), cfg.controls);
    const double t_inv = std::chrono::duration<double>(clock::now() - t0).count();

    rows.push_back({{"steps", n},
                    {"cells", sg.cells()},
                    {"convolve_seconds", t_conv},
                    {"forward_seconds", fr.report.wall_seconds},
                    {"invert_seconds", t_inv},
                    {"checksum", ab.back() + ir.h.back()}});
    log << "N = " << n << ": convolve " << t_conv << " s, forward " << fr.report.wall_seconds << " s, invert " << t_inv
        << " s\n";
  }
  detail::Artifacts art(cfg.output);
  detail::write_report(art, {{"timings", rows}}, cfg);
  return ok;
}

inline int run(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  switch (cfg.mode) {
    case Mode::forward: return run_forward(cfg, log);
    case Mode::invert: return run_invert(cfg, log);
    case Mode::roundtrip: return run_roundtrip_mode(cfg, log);
    case Mode::verify: return run_verify(cfg, log);
    case Mode::bench: return run_bench(cfg, log);
  }
  return config_error;
}

/// run() with library errors mapped to exit codes; messages go to err.
inline int run_guarded(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  try {
    return run(cfg, log);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const InvalidSpec& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const GridMismatch& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << '\n';
    return solver_error;
  }
}

/// Reads a config file; relative CSV paths are resolved against its directory.
inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  RunConfig c = parse_config(j);
  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  resolve(c.g_csv);
  resolve(c.kernel_csv);
  return c;
}

}  // namespace thermemo::cli
