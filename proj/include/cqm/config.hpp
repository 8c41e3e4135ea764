#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cqm/types.hpp"

namespace cqm {

enum class RunMode {
  Evolve,
  Moments,
  Trajectories,
  SteadyState,
  ThermalScan,
  Verify,
};

const char* to_string(RunMode m);
std::optional<RunMode> mode_from_string(const std::string& s);

enum class InitialStateKind { Fock, Coherent, Thermal };

/// Resolved, validated run configuration. Defaults are documented in the
/// README schema table.
struct SimConfig {
  RunMode mode = RunMode::Evolve;

  // oscillator
  Index dim = 40;
  double omega = 1.0;
  double hbar = 1.0;

  // measurement model
  double kappa = 0.1;
  double lambda = 0.2;

  // initial state
  InitialStateKind state_kind = InitialStateKind::Coherent;
  Index state_n = 0;          // fock level
  Complex state_alpha{1.0, 0.0};
  double state_nbar = 0.0;

  // time grid
  double t_final = 10.0;
  double dt = 1e-3;
  Index output_stride = 10;

  // trajectories
  Index n_traj = 1;
  std::optional<std::uint64_t> seed;  // mandatory for stochastic modes

  // thermal scan
  double temp_min = 0.1;
  double temp_max = 10.0;
  Index temp_points = 50;
  double kB = 1.0;

  std::string out;  // output path; empty = "<mode>.csv"
};

/// Parses the key-value config text (one `key = value` per line, `#`
/// comments, optional `[mode]` sections whose keys apply only to that mode).
/// `mode_override` (from the command line) wins over a `mode` key in the
/// text. Throws ConfigError carrying every parse and validation issue found.
SimConfig parse_config(const std::string& text,
                       const std::string& mode_override = "");

/// The resolved config as config-file text (used for run manifests).
std::string format_config(const SimConfig& cfg);

}  // namespace cqm
