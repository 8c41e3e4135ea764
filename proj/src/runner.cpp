#include "cqm/runner.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <vector>

#include "cqm/master_equation.hpp"
#include "cqm/moments.hpp"
#include "cqm/thermal.hpp"
#include "cqm/trajectories.hpp"
#include "cqm/verify.hpp"

namespace cqm {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const std::string& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) {
      throw Error("cannot open output file '" + path + "'");
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out_ << ',';
      out_ << header[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      out_ << fmt17(values[i]);
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

DensityMatrix initial_state(const SimConfig& cfg) {
  switch (cfg.state_kind) {
    case InitialStateKind::Fock:
      return fock_state(cfg.dim, cfg.state_n);
    case InitialStateKind::Coherent:
      return coherent_state(cfg.dim, cfg.state_alpha);
    case InitialStateKind::Thermal:
      return thermal_state(cfg.dim, cfg.state_nbar);
  }
  throw Error("unreachable state kind");
}

MomentState moments_of_state(const Vector& psi, const OscillatorOps& ops) {
  const auto ev = [&](const Matrix& x) {
    return (psi.adjoint() * (x * psi)).value().real();
  };
  MomentState s;
  s.mean_p = ev(ops.P);
  s.mean_q = ev(ops.Q);
  s.p2 = ev(ops.P * ops.P);
  s.pq = ev(ops.P * ops.Q + ops.Q * ops.P);
  s.q2 = ev(ops.Q * ops.Q);
  return s;
}

void write_manifest(const SimConfig& cfg, const std::string& out_path) {
  std::ofstream m(out_path + ".manifest", std::ios::binary);
  if (!m) {
    throw Error("cannot open manifest file '" + out_path + ".manifest'");
  }
  m << format_config(cfg);
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const auto dot = path.rfind('.');
  const auto slash = path.find_last_of("/\\");
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + suffix;
  }
  return path.substr(0, dot) + suffix + path.substr(dot);
}

int run_evolve(const SimConfig& cfg, const std::string& out_path,
               std::ostream& log) {
  const OscillatorOps ops = make_oscillator_ops(cfg.dim, cfg.omega, cfg.hbar);
  const MeasurementModel model = oscillator_model(ops, cfg.kappa, cfg.lambda);
  const DensityMatrix rho0 = initial_state(cfg);

  EvolveOptions opts;
  opts.output_stride = cfg.output_stride;
  const EvolutionSeries series =
      evolve(rho0, model, ops.H, cfg.t_final, cfg.dt, opts);

  CsvFile csv(out_path, {"t", "meanP", "meanQ", "P2", "PQ", "Q2",
                         "trace_drift", "min_eig", "leak"});
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const MomentState s = moments_from_density(series.states[i], ops);
    const StepDiagnostics& d = series.diagnostics[i];
    csv.row({series.times[i], s.mean_p, s.mean_q, s.p2, s.pq, s.q2,
             d.trace_drift, d.min_eigenvalue, d.leak});
  }
  if (series.flagged) {
    log << "evolve: diagnostics flagged (trace/positivity/leak outside "
           "tolerance)\n";
    return kExitFlagged;
  }
  return kExitOk;
}

int run_moments(const SimConfig& cfg, const std::string& out_path,
                std::ostream&) {
  const OscillatorOps ops = make_oscillator_ops(cfg.dim, cfg.omega, cfg.hbar);
  const MomentState s0 = moments_from_density(initial_state(cfg), ops);
  const MomentParams params(cfg.omega, cfg.lambda, cfg.kappa, cfg.hbar);
  const MomentSeries series =
      integrate_moments(s0, params, cfg.t_final, cfg.dt, cfg.output_stride);

  CsvFile csv(out_path, {"t", "meanP", "meanQ", "P2", "PQ", "Q2",
                         "trace_drift", "min_eig", "leak"});
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const MomentState& s = series.states[i];
    csv.row({series.times[i], s.mean_p, s.mean_q, s.p2, s.pq, s.q2, 0.0, 0.0,
             0.0});
  }
  return kExitOk;
}

int run_trajectories(const SimConfig& cfg, const std::string& out_path,
                     std::ostream& log) {
  const OscillatorOps ops = make_oscillator_ops(cfg.dim, cfg.omega, cfg.hbar);
  const MeasurementModel model = oscillator_model(ops, cfg.kappa, cfg.lambda);
  const DensityMatrix rho0 = initial_state(cfg);

  TrajectoryOptions opts;
  opts.record_stride = cfg.output_stride;

  double worst_leak = 0.0;
  for (Index k = 0; k < cfg.n_traj; ++k) {
    const TrajectoryRecord rec =
        run_trajectory(rho0, model, ops.H, cfg.t_final, cfg.dt, *cfg.seed,
                       static_cast<std::uint64_t>(k), opts);
    const std::string path =
        cfg.n_traj == 1 ? out_path
                        : with_suffix(out_path, "_" + std::to_string(k));
    CsvFile csv(path, {"t", "a", "meanP", "meanQ", "P2", "PQ", "Q2"});
    for (std::size_t i = 1; i < rec.times.size(); ++i) {
      const auto step = static_cast<std::size_t>(
          std::llround(rec.times[i] / cfg.dt));
      const MomentState s = moments_of_state(rec.states[i], ops);
      csv.row({rec.times[i], rec.readouts[step - 1], s.mean_p, s.mean_q, s.p2,
               s.pq, s.q2});
    }
    for (const Vector& psi : rec.states) {
      worst_leak = std::max(worst_leak, std::norm(psi(cfg.dim - 1)) +
                                            std::norm(psi(cfg.dim - 2)));
    }
  }
  if (worst_leak > 1e-6) {
    log << "trajectories: truncation leak " << worst_leak
        << " in conditioned states; increase dim\n";
    return kExitFlagged;
  }
  return kExitOk;
}

int run_steady_state(const SimConfig& cfg, const std::string& out_path,
                     std::ostream& log) {
  const OscillatorOps ops = make_oscillator_ops(cfg.dim, cfg.omega, cfg.hbar);
  const MeasurementModel model = oscillator_model(ops, cfg.kappa, cfg.lambda);
  const SteadyStateResult result = steady_state(model, ops.H);

  const MomentState s = moments_from_density(result.rho, ops);
  CsvFile csv(out_path, {"meanP", "meanQ", "P2", "PQ", "Q2", "residual",
                         "min_eig", "leak"});
  csv.row({s.mean_p, s.mean_q, s.p2, s.pq, s.q2, result.residual,
           result.rho.min_eigenvalue, result.truncation_leak});
  if (result.leak_flagged) {
    log << "steady-state: truncation leak " << result.truncation_leak
        << " above threshold; no normalizable steady state at this dim\n";
    return kExitFlagged;
  }
  return kExitOk;
}

int run_thermal_scan(const SimConfig& cfg, const std::string& out_path,
                     std::ostream&) {
  CsvFile csv(out_path, {"lambda", "T", "nbar", "D"});
  for (Index i = 0; i < cfg.temp_points; ++i) {
    const double t =
        cfg.temp_min + (cfg.temp_max - cfg.temp_min) * static_cast<double>(i) /
                           static_cast<double>(cfg.temp_points - 1);
    const ThermalSpec spec(t, cfg.omega, cfg.hbar, cfg.kB);
    const double lam = lambda_from_temperature(cfg.kappa, spec);
    csv.row({lam, t, nbar(spec),
             diffusion_coefficient(lam * cfg.omega, spec)});
  }
  return kExitOk;
}

int run_verify(std::ostream& log) {
  const auto results = run_verification_suite();
  bool all_pass = true;
  for (const auto& r : results) {
    log << (r.pass ? "[PASS] " : "[FAIL] ") << r.name;
    if (!r.detail.empty()) log << " — " << r.detail;
    log << '\n';
    all_pass = all_pass && r.pass;
  }
  log << (all_pass ? "verification suite: all checks passed\n"
                   : "verification suite: FAILURES present\n");
  return all_pass ? kExitOk : kExitError;
}

}  // namespace

std::string resolve_output_path(const SimConfig& cfg) {
  std::string out = cfg.out.empty()
                        ? std::string(to_string(cfg.mode)) + ".csv"
                        : cfg.out;
  if (const char* dir = std::getenv("CQMSIM_OUT_DIR")) {
    std::filesystem::path p(out);
    if (p.is_relative() && dir[0] != '\0') {
      out = (std::filesystem::path(dir) / p).string();
    }
  }
  return out;
}

int run(const SimConfig& cfg, std::ostream& log) {
  try {
    if (cfg.mode == RunMode::Verify) {
      return run_verify(log);
    }
    const std::string out_path = resolve_output_path(cfg);
    write_manifest(cfg, out_path);
    switch (cfg.mode) {
      case RunMode::Evolve:
        return run_evolve(cfg, out_path, log);
      case RunMode::Moments:
        return run_moments(cfg, out_path, log);
      case RunMode::Trajectories:
        return run_trajectories(cfg, out_path, log);
      case RunMode::SteadyState:
        return run_steady_state(cfg, out_path, log);
      case RunMode::ThermalScan:
        return run_thermal_scan(cfg, out_path, log);
      case RunMode::Verify:
        break;
    }
    throw Error("unreachable mode");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace cqm
