#include "cqm/measurement.hpp"

#include <cmath>

namespace cqm {

namespace {

void require_hermitian(const Matrix& x, const char* name) {
  const double r = hermiticity_residual(x);
  if (r > 1e-12) {
    throw StateError(std::string("measurement model: ") + name +
                     " not Hermitian, residual " + std::to_string(r));
  }
}

}  // namespace

MeasurementModel::MeasurementModel(Matrix a, Matrix b, double kappa_,
                                   double lambda_, double hbar_, Matrix c)
    : A(std::move(a)),
      B(std::move(b)),
      C(std::move(c)),
      kappa(kappa_),
      lambda(lambda_),
      hbar(hbar_) {
  if (C.size() == 0) {
    C = Matrix::Zero(A.rows(), A.cols());
  }
  if (A.rows() != A.cols() || B.rows() != B.cols() || C.rows() != C.cols() ||
      A.rows() != B.rows() || A.rows() != C.rows()) {
    throw DimensionError(
        "measurement model: A, B, C must be square and of equal dimension");
  }
  require_hermitian(A, "A");
  require_hermitian(B, "B");
  require_hermitian(C, "C");
  if (!(kappa > 0.0)) {
    throw ParameterError("measurement strength kappa must be positive");
  }
  if (lambda < 0.0) {
    throw ParameterError("disturbance strength lambda must be nonnegative");
  }
  if (!(hbar > 0.0)) {
    throw ParameterError("hbar must be positive");
  }
}

MeasurementModel oscillator_model(const OscillatorOps& ops, double kappa,
                                  double lambda) {
  return MeasurementModel(ops.P, ops.omega * ops.Q, kappa, lambda, ops.hbar);
}

Matrix lindblad_operator(const MeasurementModel& m) {
  return m.A - kI * (m.lambda / (2.0 * m.kappa * m.hbar)) * m.B;
}

Matrix hamiltonian_shift(const MeasurementModel& m) {
  const Matrix l = lindblad_operator(m);
  const Matrix ldag = l.adjoint();
  return -kI * (m.kappa * m.hbar / 4.0) * (ldag * ldag - l * l);
}

EffectiveHamiltonian effective_hamiltonian(const MeasurementModel& m,
                                           const Matrix& h) {
  if (h.rows() != m.dim() || h.cols() != m.dim()) {
    throw DimensionError("effective_hamiltonian: H dimension mismatch");
  }
  EffectiveHamiltonian eff;
  eff.shift = hamiltonian_shift(m);
  eff.op = h + m.C + eff.shift;
  return eff;
}

double effective_oscillator_frequency(double omega, double lambda) {
  if (lambda < 0.0) {
    throw ParameterError("lambda must be nonnegative");
  }
  if (lambda >= 2.0) {
    throw RegimeError("lambda = " + std::to_string(lambda) +
                      " >= 2: overdamped regime, shifted frequency not real");
  }
  return omega * std::sqrt(1.0 - lambda * lambda / 4.0);
}

}  // namespace cqm
