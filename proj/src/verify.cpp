#include "cqm/verify.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "cqm/master_equation.hpp"
#include "cqm/moments.hpp"
#include "cqm/thermal.hpp"
#include "cqm/trajectories.hpp"

namespace cqm {

namespace {

Matrix random_hermitian(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) x(i, j) = Complex(g(rng), g(rng));
  return hermitized(x);
}

Matrix random_density(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) x(i, j) = Complex(g(rng), g(rng));
  Matrix rho = x * x.adjoint();
  rho /= rho.trace();
  return rho;
}

struct Check {
  std::vector<VerifyResult>& results;

  void add(const std::string& name, bool pass, const std::string& detail) {
    results.push_back({name, pass, detail});
  }

  void max_below(const std::string& name, double value, double bound) {
    std::ostringstream os;
    os << "max " << value << " (bound " << bound << ")";
    add(name, value <= bound, os.str());
  }

  // a throwing check becomes a FAIL line instead of aborting the suite
  template <typename F>
  void guarded(const std::string& name, F&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(name, false, std::string("exception: ") + e.what());
    }
  }
};

}  // namespace

std::vector<VerifyResult> run_verification_suite() {
  std::vector<VerifyResult> results;
  Check check{results};
  std::mt19937_64 rng(0x5eed);

  check.guarded("generator-equivalence", [&] {
    double worst = 0.0;
    for (Index dim : {2, 4, 8, 16}) {
      for (int rep = 0; rep < 10; ++rep) {
        const MeasurementModel m(random_hermitian(dim, rng),
                                 random_hermitian(dim, rng), 0.7, 0.9, 1.3,
                                 random_hermitian(dim, rng));
        const Matrix h = random_hermitian(dim, rng);
        const Matrix rho = random_density(dim, rng);
        const Matrix diff =
            rhs_double_commutator(m, h, rho) - rhs_lindblad(m, h, rho);
        worst = std::max(worst, diff.cwiseAbs().maxCoeff());
      }
    }
    check.max_below("generator-equivalence", worst, 1e-12);
  });

  check.guarded("hamiltonian-shift-identity", [&] {
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      const MeasurementModel m(random_hermitian(4, rng),
                               random_hermitian(4, rng), 0.8, 1.1, 0.9);
      const Matrix direct = hamiltonian_shift(m);
      const Matrix identity = 0.25 * m.lambda * anticommutator(m.A, m.B);
      worst = std::max(worst, (direct - identity).cwiseAbs().maxCoeff());
    }
    const OscillatorOps ops = make_oscillator_ops(16, 1.3, 1.0);
    const MeasurementModel m = oscillator_model(ops, 0.5, 0.8);
    const Matrix heff = effective_hamiltonian(m, ops.H).op;
    const double c = m.lambda * ops.omega / 2.0;
    const double om_eff =
        effective_oscillator_frequency(ops.omega, m.lambda);
    const Matrix shifted = ops.P + c * ops.Q;
    const Matrix completed =
        0.5 * (shifted * shifted) + 0.5 * om_eff * om_eff * (ops.Q * ops.Q);
    worst = std::max(worst, (heff - completed).cwiseAbs().maxCoeff());
    check.max_below("hamiltonian-shift-identity", worst, 1e-12);
  });

  check.guarded("liouvillian-action", [&] {
    const OscillatorOps ops = make_oscillator_ops(6, 1.0, 1.0);
    const MeasurementModel m = oscillator_model(ops, 0.4, 0.6);
    const Liouvillian liou = build_liouvillian(m, ops.H);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const Matrix rho = random_density(6, rng);
      const Matrix via_matrix =
          unvec_rowmajor(liou.matrix * vec_rowmajor(rho), 6);
      const Matrix direct = rhs_lindblad(m, ops.H, rho);
      worst = std::max(worst, (via_matrix - direct).cwiseAbs().maxCoeff());
    }
    const Vector trace_row =
        liou.matrix.adjoint() * vec_rowmajor(Matrix::Identity(6, 6));
    check.max_below("liouvillian-action", worst, 1e-12);
    check.max_below("liouvillian-trace-preservation",
                    trace_row.cwiseAbs().maxCoeff(), 1e-10);
  });

  check.guarded("steady-moments-fixed-point", [&] {
    const MomentParams p(1.0, 0.1, 1.0, 1.0);
    const MomentState s = steady_moments(p);
    const auto [dp2, dpq, dq2] = second_moment_rhs(s, p);
    const double worst =
        std::max({std::abs(dp2), std::abs(dpq), std::abs(dq2)});
    check.max_below("steady-moments-fixed-point", worst, 1e-12);
  });

  check.guarded("first-moment-closed-form", [&] {
    const MomentParams p(1.0, 0.5, 1.0, 1.0);
    const double om_eff = effective_oscillator_frequency(p.omega, p.lambda);
    const double g = p.gamma();
    MomentState s0;
    s0.mean_q = 1.0;
    const MomentSeries series = integrate_moments(s0, p, 10.0, 1e-3, 100);
    double worst = 0.0;
    for (std::size_t i = 0; i < series.times.size(); ++i) {
      const double t = series.times[i];
      const double q_exact = std::exp(-0.5 * g * t) *
                             (std::cos(om_eff * t) +
                              0.5 * g / om_eff * std::sin(om_eff * t));
      worst = std::max(worst, std::abs(series.states[i].mean_q - q_exact));
    }
    check.max_below("first-moment-closed-form", worst, 1e-8);
  });

  check.guarded("thermal-relations", [&] {
    double worst_rt = 0.0;
    for (double t : {0.1, 1.0, 10.0, 100.0}) {
      const ThermalSpec spec(t, 1.0, 1.0);
      const double lam = lambda_from_temperature(0.7, spec);
      const double back = temperature_from_lambda(lam, 0.7, 1.0, 1.0);
      worst_rt = std::max(worst_rt, std::abs(back - t) / t);
    }
    check.max_below("thermal-round-trip", worst_rt, 1e-10);

    const ThermalSpec spec(1.0, 1.0, 1.0);
    const double lam = lambda_from_temperature(1.0, spec);
    const double fdt_lhs = lam * lam / (8.0 * 1.0);
    const double fdt_rhs = diffusion_coefficient(lam * 1.0, spec);
    check.max_below("fluctuation-dissipation-identity",
                    std::abs(fdt_lhs - fdt_rhs), 1e-12);
  });

  check.guarded("evolve-vs-moment-ode", [&] {
    const OscillatorOps ops = make_oscillator_ops(24, 1.0, 1.0);
    const MeasurementModel m = oscillator_model(ops, 0.1, 0.2);
    const DensityMatrix rho0 = coherent_state(24, Complex(0.6, 0.0));
    EvolveOptions opts;
    opts.output_stride = 100;
    const EvolutionSeries series = evolve(rho0, m, ops.H, 2.0, 1e-3, opts);
    const MomentParams p(1.0, 0.2, 0.1, 1.0);
    const MomentSeries mom =
        integrate_moments(moments_from_density(rho0, ops), p, 2.0, 1e-3, 100);
    double worst = 0.0;
    for (std::size_t i = 0; i < series.times.size(); ++i) {
      const MomentState a = moments_from_density(series.states[i], ops);
      const MomentState& b = mom.states[i];
      worst = std::max({worst, std::abs(a.mean_p - b.mean_p),
                        std::abs(a.mean_q - b.mean_q), std::abs(a.p2 - b.p2),
                        std::abs(a.pq - b.pq), std::abs(a.q2 - b.q2)});
    }
    check.max_below("evolve-vs-moment-ode", worst, 1e-4);
  });

  check.guarded("steady-state-vs-closed-form", [&] {
    const OscillatorOps ops = make_oscillator_ops(24, 1.0, 1.0);
    const MeasurementModel m = oscillator_model(ops, 0.1, 0.2);
    const SteadyStateResult ss = steady_state(m, ops.H);
    const MomentState got = moments_from_density(ss.rho, ops);
    const MomentState want = steady_moments(MomentParams(1.0, 0.2, 0.1, 1.0));
    const double worst =
        std::max({std::abs(got.p2 - want.p2), std::abs(got.pq - want.pq),
                  std::abs(got.q2 - want.q2)});
    check.max_below("steady-state-vs-closed-form", worst, 1e-4);
  });

  check.guarded("trajectory-determinism", [&] {
    const OscillatorOps ops = make_oscillator_ops(12, 1.0, 1.0);
    const MeasurementModel m = oscillator_model(ops, 0.3, 0.4);
    const DensityMatrix rho0 = coherent_state(12, Complex(0.5, 0.0));
    const TrajectoryRecord a =
        run_trajectory(rho0, m, ops.H, 0.5, 1e-3, 42);
    const TrajectoryRecord b =
        run_trajectory(rho0, m, ops.H, 0.5, 1e-3, 42);
    bool identical = a.readouts == b.readouts;
    for (std::size_t i = 0; identical && i < a.states.size(); ++i) {
      identical = (a.states[i] - b.states[i]).cwiseAbs().maxCoeff() == 0.0;
    }
    check.add("trajectory-determinism", identical,
              identical ? "bitwise identical records" : "records differ");
  });

  check.guarded("ensemble-mean-state-hygiene", [&] {
    const OscillatorOps ops = make_oscillator_ops(12, 1.0, 1.0);
    const MeasurementModel m = oscillator_model(ops, 0.3, 0.4);
    const DensityMatrix rho0 = coherent_state(12, Complex(0.5, 0.0));
    const EnsembleResult ens =
        ensemble_average(rho0, m, ops.H, 0.5, 1e-3, 32, 7);
    double worst = 0.0;
    for (const auto& state : ens.mean_states) {
      worst = std::max(worst, state.trace_deviation);
      worst = std::max(worst, std::max(0.0, -state.min_eigenvalue));
    }
    check.max_below("ensemble-mean-state-hygiene", worst, 1e-9);
  });

  check.guarded("oscillator-constructors", [&] {
    const OscillatorOps ops = make_oscillator_ops(20, 2.0, 0.7);
    const Matrix want_h = 0.5 * (ops.P * ops.P) +
                          0.5 * ops.omega * ops.omega * (ops.Q * ops.Q);
    double worst = (ops.H - want_h).cwiseAbs().maxCoeff();
    const Matrix comm = commutator(ops.Q, ops.P);
    const Matrix expect_comm =
        kI * ops.hbar * Matrix::Identity(20, 20);
    worst = std::max(worst, (comm - expect_comm)
                                .topLeftCorner(19, 19)
                                .cwiseAbs()
                                .maxCoeff());
    const DensityMatrix th = thermal_state(60, 1.0);
    const OscillatorOps ops2 = make_oscillator_ops(60, 1.0, 1.0);
    const double occupation = real_expectation(th, ops2.raise * ops2.lower);
    worst = std::max(worst, std::abs(occupation - 1.0) / 1e3);
    check.max_below("oscillator-constructors", worst, 1e-6);
  });

  return results;
}

}  // namespace cqm
