#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cqm/config.hpp"
#include "cqm/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw cqm::Error("cannot read config file '" + path + "'");
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cqmsim — continuous-measurement quantum Brownian motion "
               "simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool seed_given = false;

  const char* mode_names[] = {"evolve",       "moments",      "trajectories",
                              "steady-state", "thermal-scan", "verify"};
  for (const char* name : mode_names) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "config file (key = value lines)");
    sub->add_option("--out", out_override, "output CSV path");
    sub->add_option("--seed", seed_override, "RNG seed override")
        ->each([&](const std::string&) { seed_given = true; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string mode = app.get_subcommands().front()->get_name();
    std::string text = config_path.empty() ? "" : read_file(config_path);
    // Command-line overrides are appended, so they win over config keys.
    if (seed_given) {
      text += "\nseed = " + std::to_string(seed_override) + "\n";
    }
    cqm::SimConfig cfg = cqm::parse_config(text, mode);
    if (!out_override.empty()) cfg.out = out_override;
    return cqm::run(cfg, std::cout);
  } catch (const cqm::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return cqm::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cqm::kExitError;
  }
}
