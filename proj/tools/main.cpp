#include "chshmdi/app.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

chshmdi::RunConfig load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw chshmdi::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return chshmdi::parse_config(text.str());
  } catch (const chshmdi::ConfigError& e) {
    throw chshmdi::ConfigError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoy-state CHSH-MDI-QKD key rate scans and bound diagnostics"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<double> refine_step;
  auto* scan = app.add_subcommand("scan", "Optimized key rate versus distance, written as CSV");
  scan->add_option("--config", config_path, "Run configuration (key = value)")->required();
  scan->add_option("--refine-step", refine_step, "Resolve the secure distance to this many km");

  double distance = 0.0;
  std::optional<double> signal;
  auto* diag = app.add_subcommand("diag", "Bounds against the photon-number truth at one distance");
  diag->add_option("--config", config_path, "Run configuration (key = value)")->required();
  diag->add_option("--distance", distance, "Distance in km")->required();
  diag->add_option("--signal", signal, "Signal intensity (default: optimized)");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = load(config_path);
    if (*scan) return chshmdi::run_scan(config, std::cout, std::cerr, refine_step);
    return chshmdi::run_diagnostics(config, distance, std::cout, std::cerr, signal);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
