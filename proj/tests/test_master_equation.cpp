#include "cqm/master_equation.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "cqm/moments.hpp"
#include "test_support.hpp"

using namespace cqm;

namespace {

MeasurementModel random_model(Index dim, std::mt19937_64& rng,
                              bool with_c = true) {
  return MeasurementModel(
      test::random_hermitian(dim, rng), test::random_hermitian(dim, rng), 0.7,
      0.9, 1.3,
      with_c ? test::random_hermitian(dim, rng) : Matrix(Matrix::Zero(dim, dim)));
}

}  // namespace

TEST_CASE("double-commutator generator") {
  std::mt19937_64 rng(41);

  SUBCASE("lambda=0 reduces to the minimally disturbing form") {
    const Matrix a = test::random_hermitian(6, rng);
    const Matrix b = test::random_hermitian(6, rng);
    const Matrix h = test::random_hermitian(6, rng);
    const Matrix rho = test::random_density(6, rng);
    const MeasurementModel m(a, b, 0.8, 0.0, 1.1);
    const Matrix want = -(kI / 1.1) * commutator(h, rho) -
                        0.4 * commutator(a, commutator(a, rho));
    CHECK((rhs_double_commutator(m, h, rho) - want).cwiseAbs().maxCoeff() <
          1e-13);
  }

  SUBCASE("maximally mixed input isolates the cross term") {
    const Index dim = 5;
    const Matrix a = test::random_hermitian(dim, rng);
    const Matrix b = test::random_hermitian(dim, rng);
    const MeasurementModel m(a, b, 0.6, 0.9, 1.2);
    const Matrix h = Matrix::Zero(dim, dim);
    const Matrix rho = Matrix::Identity(dim, dim) / double(dim);
    // double commutators of the identity vanish; remaining term is
    // -(i lambda / (hbar dim)) [B, A]
    const Matrix want =
        -(kI * m.lambda / (m.hbar * double(dim))) * commutator(b, a);
    CHECK((rhs_double_commutator(m, h, rho) - want).cwiseAbs().maxCoeff() <
          1e-13);
  }

  SUBCASE("trace-free output") {
    for (int rep = 0; rep < 5; ++rep) {
      const MeasurementModel m = random_model(7, rng);
      const Matrix h = test::random_hermitian(7, rng);
      const Matrix rho = test::random_density(7, rng);
      CHECK(std::abs(rhs_double_commutator(m, h, rho).trace()) < 1e-12);
    }
  }
}

TEST_CASE("lindblad form: reduction, equivalence, structure") {
  std::mt19937_64 rng(43);

  SUBCASE("lambda=0: Hermitian l = A") {
    const Matrix a = test::random_hermitian(6, rng);
    const Matrix b = test::random_hermitian(6, rng);
    const Matrix h = test::random_hermitian(6, rng);
    const Matrix rho = test::random_density(6, rng);
    const MeasurementModel m(a, b, 0.8, 0.0, 1.1);
    const Matrix a2 = a * a;
    const Matrix want = -(kI / 1.1) * commutator(h, rho) -
                        0.4 * (a2 * rho - 2.0 * a * rho * a + rho * a2);
    CHECK((rhs_lindblad(m, h, rho) - want).cwiseAbs().maxCoeff() < 1e-13);
  }

  SUBCASE("equivalence with the double-commutator form, dims 2..16") {
    double worst = 0.0;
    for (Index dim : {2, 4, 8, 16}) {
      for (int rep = 0; rep < 10; ++rep) {
        const MeasurementModel m = random_model(dim, rng);
        const Matrix h = test::random_hermitian(dim, rng);
        const Matrix rho = test::random_density(dim, rng);
        const double diff = (rhs_lindblad(m, h, rho) -
                             rhs_double_commutator(m, h, rho))
                                .cwiseAbs()
                                .maxCoeff();
        worst = std::max(worst, diff);
      }
    }
    CHECK(worst < 1e-12);
  }

  SUBCASE("trace-free and Hermiticity-preserving") {
    for (int rep = 0; rep < 5; ++rep) {
      const MeasurementModel m = random_model(6, rng);
      const Matrix h = test::random_hermitian(6, rng);
      const Matrix rho = test::random_density(6, rng);
      const Matrix out = rhs_lindblad(m, h, rho);
      CHECK(std::abs(out.trace()) < 1e-12);
      CHECK(hermiticity_residual(out) < 1e-12);
    }
  }
}

TEST_CASE("vectorization convention is row-major") {
  Matrix x(2, 2);
  x << Complex(1, 0), Complex(2, 0), Complex(3, 0), Complex(4, 0);
  const Vector v = vec_rowmajor(x);
  CHECK(v(0) == Complex(1, 0));
  CHECK(v(1) == Complex(2, 0));
  CHECK(v(2) == Complex(3, 0));
  CHECK(v(3) == Complex(4, 0));
  CHECK((unvec_rowmajor(v, 2) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("liouvillian superoperator") {
  std::mt19937_64 rng(47);

  SUBCASE("action matches rhs_lindblad on random states") {
    const MeasurementModel m = random_model(5, rng);
    const Matrix h = test::random_hermitian(5, rng);
    const Liouvillian liou = build_liouvillian(m, h);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      const Matrix rho = test::random_density(5, rng);
      const Matrix via = unvec_rowmajor(liou.matrix * vec_rowmajor(rho), 5);
      worst = std::max(
          worst, (via - rhs_lindblad(m, h, rho)).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-12);
  }

  SUBCASE("trace functional is annihilated from the left") {
    const MeasurementModel m = random_model(6, rng);
    const Matrix h = test::random_hermitian(6, rng);
    const Liouvillian liou = build_liouvillian(m, h);
    const Vector tr = vec_rowmajor(Matrix::Identity(6, 6));
    CHECK((tr.transpose() * liou.matrix).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("zero couplings give a purely imaginary spectrum") {
    // A = B = 0 switches the dissipator off entirely
    const Index dim = 2;
    Matrix h = Matrix::Zero(dim, dim);
    h(0, 0) = 1.0;
    h(1, 1) = -1.0;
    const MeasurementModel m(Matrix::Zero(dim, dim), Matrix::Zero(dim, dim),
                             1.0, 0.0, 1.0);
    const Liouvillian liou = build_liouvillian(m, h);
    Eigen::ComplexEigenSolver<Matrix> es(liou.matrix);
    CHECK(es.eigenvalues().real().cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("dimension cap") {
    const OscillatorOps ops = make_oscillator_ops(70, 1.0, 1.0);
    const MeasurementModel m = oscillator_model(ops, 0.5, 0.2);
    CHECK_THROWS_AS(build_liouvillian(m, ops.H), DimensionError);
  }
}

TEST_CASE("evolve: unitary limit keeps a coherent state coherent") {
  // zero couplings: A = B = 0 with the oscillator Hamiltonian
  const Index dim = 40;
  const OscillatorOps ops = make_oscillator_ops(dim, 1.0, 1.0);
  const MeasurementModel m(Matrix::Zero(dim, dim), Matrix::Zero(dim, dim), 1.0,
                           0.0, 1.0);
  const DensityMatrix rho0 = coherent_state(dim, Complex(1.0, 0.0));
  EvolveOptions opts;
  opts.output_stride = 100;
  const double t_final = 10.0 * 2.0 * M_PI;
  const EvolutionSeries series = evolve(rho0, m, ops.H, t_final, 1e-3, opts);
  double worst = 0.0;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double want = std::sqrt(2.0) * std::cos(series.times[i]);
    const double got = real_expectation(series.states[i], ops.Q);
    worst = std::max(worst, std::abs(got - want));
  }
  CHECK(worst < 1e-6);
  CHECK_FALSE(series.flagged);
  CHECK(series.final_trace_drift < 1e-8);
}

TEST_CASE("evolve: moments track the moment ODE for the oscillator model") {
  // randomized underdamped parameters; the moment equations close exactly
  // for this quadratic model, so disagreement beyond truncation is a bug
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Index dim = 30;
  const OscillatorOps ops = make_oscillator_ops(dim, 1.0, 1.0);
  const DensityMatrix rho0 = coherent_state(dim, Complex(1.0, 0.0));
  for (int rep = 0; rep < 3; ++rep) {
    const double lambda = 0.05 + 0.75 * u(rng);
    const double kappa = 0.05 + 0.3 * u(rng);
    const MeasurementModel m = oscillator_model(ops, kappa, lambda);
    EvolveOptions opts;
    opts.output_stride = 50;
    const EvolutionSeries series = evolve(rho0, m, ops.H, 3.0, 1e-3, opts);
    const MomentParams p(1.0, lambda, kappa, 1.0);
    const MomentState s0 = moments_from_density(rho0, ops);
    double worst = 0.0;
    for (std::size_t i = 0; i < series.times.size(); ++i) {
      const MomentState got = moments_from_density(series.states[i], ops);
      const MomentState want = test::moments_exact(s0, p, series.times[i]);
      worst = std::max({worst, std::abs(got.mean_p - want.mean_p),
                        std::abs(got.mean_q - want.mean_q),
                        std::abs(got.p2 - want.p2), std::abs(got.pq - want.pq),
                        std::abs(got.q2 - want.q2)});
    }
    CHECK(worst < 1e-4);

    // hygiene along the run
    CHECK(series.max_trace_drift < 1e-8);
    CHECK(series.max_herm_residual < 1e-10);
    for (const auto& diag : series.diagnostics) {
      CHECK(diag.min_eigenvalue > -1e-6);
    }
  }
}

TEST_CASE("evolve: purity cannot grow from the maximally mixed state") {
  const Index dim = 10;
  const OscillatorOps ops = make_oscillator_ops(dim, 1.0, 1.0);
  const MeasurementModel m = oscillator_model(ops, 0.4, 0.0);  // lambda = 0
  const Matrix rho = Matrix::Identity(dim, dim) / double(dim);
  const Matrix drho = rhs_lindblad(m, ops.H, rho);
  const double purity_rate = 2.0 * expectation(rho, drho).real();
  CHECK(purity_rate <= 1e-10);
}

TEST_CASE("evolve rejects bad inputs") {
  const OscillatorOps ops = make_oscillator_ops(8, 1.0, 1.0);
  const MeasurementModel m = oscillator_model(ops, 0.5, 0.2);
  const DensityMatrix rho0 = fock_state(8, 0);
  CHECK_THROWS_AS(evolve(rho0, m, ops.H, 1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(evolve(rho0, m, ops.H, 1.0, -0.1), ParameterError);
  // far beyond the stability heuristic: rejected mid-run, not silent garbage
  CHECK_THROWS_AS(evolve(rho0, m, ops.H, 400.0, 2.0), Error);
}

TEST_CASE("steady state") {
  SUBCASE("matches the closed-form moments") {
    const Index dim = 30;
    const OscillatorOps ops = make_oscillator_ops(dim, 1.0, 1.0);
    const MeasurementModel m = oscillator_model(ops, 0.1, 0.2);
    const SteadyStateResult ss = steady_state(m, ops.H);
    CHECK(ss.residual < 1e-10);
    CHECK_FALSE(ss.leak_flagged);
    CHECK(ss.rho.herm_residual < 1e-12);
    CHECK(ss.rho.min_eigenvalue > -1e-8);
    const MomentState got = moments_from_density(ss.rho, ops);
    const MomentState want = steady_moments(MomentParams(1.0, 0.2, 0.1, 1.0));
    CHECK(std::abs(got.p2 - want.p2) < 1e-4);
    CHECK(std::abs(got.pq - want.pq) < 1e-4);
    CHECK(std::abs(got.q2 - want.q2) < 1e-4);
    CHECK(std::abs(got.mean_p) < 1e-6);
    CHECK(std::abs(got.mean_q) < 1e-6);
  }

  SUBCASE("momentum monitoring without friction has no normalizable steady "
          "state: leak flag") {
    const Index dim = 16;
    const OscillatorOps ops = make_oscillator_ops(dim, 1.0, 1.0);
    const MeasurementModel m = oscillator_model(ops, 0.5, 0.0);
    const SteadyStateResult ss = steady_state(m, ops.H);
    CHECK(ss.leak_flagged);
    CHECK(ss.truncation_leak > 1e-6);
  }

  SUBCASE("degenerate kernel is detected") {
    // diagonal A with diagonal H: every diagonal state is stationary
    const Index dim = 4;
    Matrix a = Matrix::Zero(dim, dim);
    Matrix h = Matrix::Zero(dim, dim);
    for (Index n = 0; n < dim; ++n) {
      a(n, n) = static_cast<double>(n + 1);
      h(n, n) = 0.3 * static_cast<double>(n);
    }
    const MeasurementModel m(a, Matrix::Zero(dim, dim), 0.5, 0.0, 1.0);
    CHECK_THROWS_AS(steady_state(m, h), KernelError);
  }
}

TEST_CASE("long-time evolution converges to the dense steady state") {
  const Index dim = 20;
  const OscillatorOps ops = make_oscillator_ops(dim, 1.0, 1.0);
  const MeasurementModel m = oscillator_model(ops, 0.2, 0.6);
  const SteadyStateResult ss = steady_state(m, ops.H);
  const DensityMatrix rho0 = coherent_state(dim, Complex(0.5, 0.0));
  EvolveOptions opts;
  opts.output_stride = 100000000;  // final state only
  const EvolutionSeries series = evolve(rho0, m, ops.H, 60.0, 2e-3, opts);
  CHECK(test::trace_distance(series.states.back().mat, ss.rho.mat) < 1e-6);
}
