#include "cqm/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

namespace cqm {

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::Evolve: return "evolve";
    case RunMode::Moments: return "moments";
    case RunMode::Trajectories: return "trajectories";
    case RunMode::SteadyState: return "steady-state";
    case RunMode::ThermalScan: return "thermal-scan";
    case RunMode::Verify: return "verify";
  }
  return "unknown";
}

std::optional<RunMode> mode_from_string(const std::string& s) {
  if (s == "evolve") return RunMode::Evolve;
  if (s == "moments") return RunMode::Moments;
  if (s == "trajectories") return RunMode::Trajectories;
  if (s == "steady-state") return RunMode::SteadyState;
  if (s == "thermal-scan") return RunMode::ThermalScan;
  if (s == "verify") return RunMode::Verify;
  return std::nullopt;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct KeyValue {
  std::string key;
  std::string value;
  std::string section;  // empty = global
  int line = 0;
};

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size() && std::isfinite(out);
  } catch (...) {
    return false;
  }
}

bool parse_index(const std::string& s, Index& out) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) return false;
    out = static_cast<Index>(v);
    return true;
  } catch (...) {
    return false;
  }
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  try {
    std::size_t pos = 0;
    out = std::stoull(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> parts;
  std::istringstream iss(s);
  std::string p;
  while (iss >> p) parts.push_back(p);
  return parts;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SimConfig parse_config(const std::string& text,
                       const std::string& mode_override) {
  std::vector<std::string> issues;
  std::vector<KeyValue> pairs;

  // pass 1: line-level parse
  {
    std::istringstream stream(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(stream, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          issues.push_back("line " + std::to_string(line_no) +
                           ": unterminated section header");
          continue;
        }
        section = trim(line.substr(1, line.size() - 2));
        if (!mode_from_string(section)) {
          issues.push_back("line " + std::to_string(line_no) +
                           ": unknown section [" + section + "]");
          section.clear();
        }
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        issues.push_back("line " + std::to_string(line_no) +
                         ": expected `key = value`");
        continue;
      }
      KeyValue kv;
      kv.key = trim(line.substr(0, eq));
      kv.value = trim(line.substr(eq + 1));
      kv.section = section;
      kv.line = line_no;
      if (kv.key.empty() || kv.value.empty()) {
        issues.push_back("line " + std::to_string(line_no) +
                         ": empty key or value");
        continue;
      }
      pairs.push_back(std::move(kv));
    }
  }

  SimConfig cfg;

  // mode first: section filtering depends on it
  std::string mode_str = mode_override;
  for (const auto& kv : pairs) {
    if (kv.key == "mode" && kv.section.empty()) {
      if (mode_str.empty()) {
        mode_str = kv.value;
      } else if (mode_str != kv.value) {
        issues.push_back("mode: config says '" + kv.value +
                         "' but command line says '" + mode_str + "'");
      }
    }
  }
  if (mode_str.empty()) {
    issues.push_back("mode: missing (give it on the command line or as `mode = ...`)");
  } else if (auto m = mode_from_string(mode_str)) {
    cfg.mode = *m;
  } else {
    issues.push_back("mode: unknown mode '" + mode_str + "'");
  }

  bool seed_given = false;
  const std::string active_section = to_string(cfg.mode);

  for (const auto& kv : pairs) {
    if (!kv.section.empty() && kv.section != active_section) continue;
    const std::string where = " (line " + std::to_string(kv.line) + ")";
    const auto bad = [&](const std::string& why) {
      issues.push_back(kv.key + ": " + why + where);
    };
    if (kv.key == "mode") {
      continue;  // handled above
    } else if (kv.key == "dim") {
      if (!parse_index(kv.value, cfg.dim)) bad("not an integer");
    } else if (kv.key == "omega") {
      if (!parse_double(kv.value, cfg.omega)) bad("not a number");
    } else if (kv.key == "hbar") {
      if (!parse_double(kv.value, cfg.hbar)) bad("not a number");
    } else if (kv.key == "kappa") {
      if (!parse_double(kv.value, cfg.kappa)) bad("not a number");
    } else if (kv.key == "lambda") {
      if (!parse_double(kv.value, cfg.lambda)) bad("not a number");
    } else if (kv.key == "state") {
      const auto parts = split_ws(kv.value);
      if (parts.empty()) {
        bad("empty state spec");
      } else if (parts[0] == "fock") {
        cfg.state_kind = InitialStateKind::Fock;
        if (parts.size() != 2 || !parse_index(parts[1], cfg.state_n)) {
          bad("expected `state = fock <n>`");
        }
      } else if (parts[0] == "coherent") {
        cfg.state_kind = InitialStateKind::Coherent;
        double re = 0.0, im = 0.0;
        if (parts.size() == 2 && parse_double(parts[1], re)) {
          cfg.state_alpha = Complex(re, 0.0);
        } else if (parts.size() == 3 && parse_double(parts[1], re) &&
                   parse_double(parts[2], im)) {
          cfg.state_alpha = Complex(re, im);
        } else {
          bad("expected `state = coherent <re> [im]`");
        }
      } else if (parts[0] == "thermal") {
        cfg.state_kind = InitialStateKind::Thermal;
        if (parts.size() != 2 || !parse_double(parts[1], cfg.state_nbar)) {
          bad("expected `state = thermal <nbar>`");
        }
      } else {
        bad("unknown state kind '" + parts[0] + "' (fock|coherent|thermal)");
      }
    } else if (kv.key == "t_final") {
      if (!parse_double(kv.value, cfg.t_final)) bad("not a number");
    } else if (kv.key == "dt") {
      if (!parse_double(kv.value, cfg.dt)) bad("not a number");
    } else if (kv.key == "output_stride") {
      if (!parse_index(kv.value, cfg.output_stride)) bad("not an integer");
    } else if (kv.key == "n_traj") {
      if (!parse_index(kv.value, cfg.n_traj)) bad("not an integer");
    } else if (kv.key == "seed") {
      std::uint64_t s = 0;
      if (!parse_u64(kv.value, s)) {
        bad("not a nonnegative integer");
      } else {
        cfg.seed = s;
        seed_given = true;
      }
    } else if (kv.key == "temp_min") {
      if (!parse_double(kv.value, cfg.temp_min)) bad("not a number");
    } else if (kv.key == "temp_max") {
      if (!parse_double(kv.value, cfg.temp_max)) bad("not a number");
    } else if (kv.key == "temp_points") {
      if (!parse_index(kv.value, cfg.temp_points)) bad("not an integer");
    } else if (kv.key == "kB") {
      if (!parse_double(kv.value, cfg.kB)) bad("not a number");
    } else if (kv.key == "out") {
      cfg.out = kv.value;
    } else {
      bad("unknown key");
    }
  }

  // field validation (module preconditions re-checked at parse time)
  if (cfg.dim < 2) issues.push_back("dim: must be >= 2");
  if (!(cfg.omega > 0.0)) issues.push_back("omega: must be positive");
  if (!(cfg.hbar > 0.0)) issues.push_back("hbar: must be positive");
  if (!(cfg.kappa > 0.0)) issues.push_back("kappa: must be positive");
  if (cfg.lambda < 0.0) issues.push_back("lambda: must be nonnegative");
  if (!(cfg.dt > 0.0)) issues.push_back("dt: must be positive");
  if (cfg.t_final < 0.0) issues.push_back("t_final: must be nonnegative");
  if (cfg.output_stride < 1) issues.push_back("output_stride: must be >= 1");
  if (cfg.state_kind == InitialStateKind::Fock &&
      (cfg.state_n < 0 || cfg.state_n >= cfg.dim)) {
    issues.push_back("state: fock level outside [0, dim)");
  }
  if (cfg.state_kind == InitialStateKind::Thermal && cfg.state_nbar < 0.0) {
    issues.push_back("state: thermal nbar must be nonnegative");
  }
  if (cfg.mode == RunMode::Trajectories) {
    if (cfg.n_traj < 1) issues.push_back("n_traj: must be >= 1");
    if (!seed_given) {
      issues.push_back("seed: mandatory for trajectories (reproducibility)");
    }
  }
  if (cfg.mode == RunMode::SteadyState && cfg.dim > 64) {
    issues.push_back("dim: steady-state needs dim <= 64 (dim^2 cap 4096)");
  }
  if (cfg.mode == RunMode::ThermalScan) {
    if (!(cfg.temp_min > 0.0)) issues.push_back("temp_min: must be positive");
    if (!(cfg.temp_max > cfg.temp_min)) {
      issues.push_back("temp_max: must exceed temp_min");
    }
    if (cfg.temp_points < 2) issues.push_back("temp_points: must be >= 2");
    if (!(cfg.kB > 0.0)) issues.push_back("kB: must be positive");
  }

  if (!issues.empty()) {
    throw ConfigError(std::move(issues));
  }
  return cfg;
}

std::string format_config(const SimConfig& cfg) {
  std::ostringstream os;
  os << "mode = " << to_string(cfg.mode) << "\n";
  os << "dim = " << cfg.dim << "\n";
  os << "omega = " << fmt17(cfg.omega) << "\n";
  os << "hbar = " << fmt17(cfg.hbar) << "\n";
  os << "kappa = " << fmt17(cfg.kappa) << "\n";
  os << "lambda = " << fmt17(cfg.lambda) << "\n";
  switch (cfg.state_kind) {
    case InitialStateKind::Fock:
      os << "state = fock " << cfg.state_n << "\n";
      break;
    case InitialStateKind::Coherent:
      os << "state = coherent " << fmt17(cfg.state_alpha.real()) << " "
         << fmt17(cfg.state_alpha.imag()) << "\n";
      break;
    case InitialStateKind::Thermal:
      os << "state = thermal " << fmt17(cfg.state_nbar) << "\n";
      break;
  }
  os << "t_final = " << fmt17(cfg.t_final) << "\n";
  os << "dt = " << fmt17(cfg.dt) << "\n";
  os << "output_stride = " << cfg.output_stride << "\n";
  os << "n_traj = " << cfg.n_traj << "\n";
  if (cfg.seed) os << "seed = " << *cfg.seed << "\n";
  os << "temp_min = " << fmt17(cfg.temp_min) << "\n";
  os << "temp_max = " << fmt17(cfg.temp_max) << "\n";
  os << "temp_points = " << cfg.temp_points << "\n";
  os << "kB = " << fmt17(cfg.kB) << "\n";
  if (!cfg.out.empty()) os << "out = " << cfg.out << "\n";
  return os.str();
}

}  // namespace cqm
