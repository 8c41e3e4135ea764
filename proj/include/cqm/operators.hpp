#pragma once

#include "cqm/types.hpp"

namespace cqm {

/// max elementwise |X - X^dagger|.
double hermiticity_residual(const Matrix& x);

/// (X + X^dagger)/2.
Matrix hermitized(const Matrix& x);

Matrix commutator(const Matrix& x, const Matrix& y);
Matrix anticommutator(const Matrix& x, const Matrix& y);

/// Density matrix with cached diagnostics. `validated` enforces the
/// structural invariants (unit trace, Hermiticity, positivity); `unchecked`
/// only records them, for states produced by numerical evolution.
struct DensityMatrix {
  Matrix mat;
  double trace_deviation = 0.0;  // |tr(rho) - 1|
  double herm_residual = 0.0;
  double min_eigenvalue = 0.0;

  static DensityMatrix validated(Matrix m, double trace_tol = 1e-9,
                                 double positivity_tol = 1e-8);
  static DensityMatrix unchecked(Matrix m);

  Index dim() const { return mat.rows(); }
};

/// tr(rho X).
Complex expectation(const DensityMatrix& rho, const Matrix& x);
Complex expectation(const Matrix& rho, const Matrix& x);

/// tr(rho X) for Hermitian X; throws StateError if the imaginary part
/// exceeds `imag_tol`.
double real_expectation(const DensityMatrix& rho, const Matrix& x,
                        double imag_tol = 1e-10);

/// Position, momentum, Hamiltonian and ladder operators on a truncated Fock
/// space, unit mass: H = P^2/2 + omega^2 Q^2 / 2.
struct OscillatorOps {
  Matrix Q, P, H, lower, raise;
  double omega = 0.0;
  double hbar = 0.0;
  double sym_residual = 0.0;  // max Hermiticity residual before symmetrization

  Index dim() const { return Q.rows(); }
};

OscillatorOps make_oscillator_ops(Index dim, double omega, double hbar);

DensityMatrix fock_state(Index dim, Index n);
DensityMatrix coherent_state(Index dim, Complex alpha, double leak_tol = 1e-8);
DensityMatrix thermal_state(Index dim, double nbar, double leak_tol = 1e-8);

/// Normalized coherent-state amplitude vector (the pure state behind
/// coherent_state); throws TruncationError when the discarded population
/// exceeds `leak_tol`.
Vector coherent_vector(Index dim, Complex alpha, double leak_tol = 1e-8);

/// Population in the top two Fock levels: the basis-cutoff diagnostic.
double truncation_leak(const Matrix& rho);
double truncation_leak(const DensityMatrix& rho);

}  // namespace cqm
