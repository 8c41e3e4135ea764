#pragma once

#include "cqm/operators.hpp"
#include "cqm/types.hpp"

namespace cqm {

/// Continuous-measurement model: monitored observable A with strength kappa,
/// back-action observable B with strength lambda, extra phase generator C
/// (default zero). The dimensional contract: kappa * [A]^2 * time and
/// lambda * [A] * [B] / hbar * time are dimensionless.
struct MeasurementModel {
  Matrix A, B, C;
  double kappa = 0.0;
  double lambda = 0.0;
  double hbar = 0.0;

  /// An empty `c` stands for the zero operator.
  MeasurementModel(Matrix a, Matrix b, double kappa_, double lambda_,
                   double hbar_, Matrix c = Matrix());

  Index dim() const { return A.rows(); }
};

/// Monitored momentum with coordinate back-action: A = P, B = omega Q, C = 0.
MeasurementModel oscillator_model(const OscillatorOps& ops, double kappa,
                                  double lambda);

/// l = A - i (lambda / 2 kappa hbar) B; non-Hermitian unless lambda = 0.
Matrix lindblad_operator(const MeasurementModel& m);

/// Measurement-induced Hamiltonian shift -i (kappa hbar / 4)(l+^2 - l^2),
/// identically equal to (lambda/4)(AB + BA).
Matrix hamiltonian_shift(const MeasurementModel& m);

struct EffectiveHamiltonian {
  Matrix op;     // H + C + shift
  Matrix shift;  // the measurement-induced part alone
};

EffectiveHamiltonian effective_hamiltonian(const MeasurementModel& m,
                                           const Matrix& h);

/// Damped-oscillator frequency Omega = omega sqrt(1 - lambda^2/4); throws
/// RegimeError for lambda >= 2 (overdamped).
double effective_oscillator_frequency(double omega, double lambda);

}  // namespace cqm
