// thermemo: forward simulation, kernel identification, round trips,
// self-verification and timing from a JSON run configuration.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "runner.hpp"

int main(int argc, char** argv) {
  using namespace thermemo::cli;
  CLI::App app{"Heat conduction with memory and thermostat feedback: forward and inverse solver"};
  std::string config_path;
  std::string out_dir;
  std::string mode;
  bool strict = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--mode", mode, "forward | invert | roundtrip | verify | bench (overrides the config)");
  app.add_flag("--strict", strict, "abort when the initial data fail the compatibility checks");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : config_error;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) {
      cfg = load_config(config_path);
    } else if (mode.empty()) {
      std::cerr << "config error: --config or --mode is required\n";
      return config_error;
    }
    if (!mode.empty()) cfg.mode = parse_mode(mode);
    if (!out_dir.empty()) cfg.output = out_dir;
    if (strict) cfg.controls.strict = true;
  } catch (const thermemo::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  }
  return run_guarded(cfg, std::cout, std::cerr);
}
