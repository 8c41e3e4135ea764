#include "cqm/operators.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>

namespace cqm {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

double hermiticity_residual(const Matrix& x) {
  return (x - x.adjoint()).cwiseAbs().maxCoeff();
}

Matrix hermitized(const Matrix& x) { return 0.5 * (x + x.adjoint()); }

namespace {

void require_same_dim(const Matrix& x, const Matrix& y, const char* op) {
  if (x.rows() != x.cols() || y.rows() != y.cols() || x.rows() != y.rows()) {
    throw DimensionError(std::string(op) + ": dimension mismatch (" +
                         std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + " vs " +
                         std::to_string(y.rows()) + "x" +
                         std::to_string(y.cols()) + ")");
  }
}

double min_eigenvalue_of(const Matrix& herm) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

Matrix commutator(const Matrix& x, const Matrix& y) {
  require_same_dim(x, y, "commutator");
  return x * y - y * x;
}

Matrix anticommutator(const Matrix& x, const Matrix& y) {
  require_same_dim(x, y, "anticommutator");
  return x * y + y * x;
}

DensityMatrix DensityMatrix::validated(Matrix m, double trace_tol,
                                       double positivity_tol) {
  DensityMatrix rho = unchecked(std::move(m));
  if (rho.trace_deviation > trace_tol) {
    throw StateError("density matrix trace deviates from 1 by " +
                     fmt(rho.trace_deviation));
  }
  if (rho.herm_residual > 1e-12) {
    throw StateError("density matrix not Hermitian, residual " +
                     fmt(rho.herm_residual));
  }
  if (rho.min_eigenvalue < -positivity_tol) {
    throw StateError("density matrix not positive, min eigenvalue " +
                     fmt(rho.min_eigenvalue));
  }
  return rho;
}

DensityMatrix DensityMatrix::unchecked(Matrix m) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw DimensionError("density matrix must be square with dim >= 2");
  }
  DensityMatrix rho;
  rho.trace_deviation = std::abs(m.trace() - Complex(1.0));
  rho.herm_residual = hermiticity_residual(m);
  rho.min_eigenvalue = min_eigenvalue_of(hermitized(m));
  rho.mat = std::move(m);
  return rho;
}

Complex expectation(const Matrix& rho, const Matrix& x) {
  require_same_dim(rho, x, "expectation");
  // tr(rho X) = sum_ij rho_ij X_ji, avoids forming the product.
  return (rho.transpose().cwiseProduct(x)).sum();
}

Complex expectation(const DensityMatrix& rho, const Matrix& x) {
  return expectation(rho.mat, x);
}

double real_expectation(const DensityMatrix& rho, const Matrix& x,
                        double imag_tol) {
  const Complex v = expectation(rho, x);
  if (std::abs(v.imag()) > imag_tol) {
    throw StateError("expectation of Hermitian operator has imaginary part " +
                     fmt(v.imag()));
  }
  return v.real();
}

OscillatorOps make_oscillator_ops(Index dim, double omega, double hbar) {
  if (dim < 2) {
    throw DimensionError("oscillator dimension must be >= 2, got " +
                         std::to_string(dim));
  }
  if (!(omega > 0.0)) {
    throw ParameterError("omega must be positive");
  }
  if (!(hbar > 0.0)) {
    throw ParameterError("hbar must be positive");
  }

  Matrix lower = Matrix::Zero(dim, dim);
  for (Index n = 1; n < dim; ++n) {
    lower(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  const Matrix raise = lower.adjoint();

  OscillatorOps ops;
  ops.omega = omega;
  ops.hbar = hbar;
  ops.lower = lower;
  ops.raise = raise;

  Matrix q = std::sqrt(hbar / (2.0 * omega)) * (lower + raise);
  Matrix p = kI * std::sqrt(hbar * omega / 2.0) * (raise - lower);
  Matrix h = 0.5 * (p * p) + 0.5 * omega * omega * (q * q);

  double residual = std::max({hermiticity_residual(q), hermiticity_residual(p),
                              hermiticity_residual(h)});
  ops.sym_residual = residual;
  ops.Q = hermitized(q);
  ops.P = hermitized(p);
  ops.H = hermitized(h);
  return ops;
}

DensityMatrix fock_state(Index dim, Index n) {
  if (dim < 2) {
    throw DimensionError("fock_state: dim must be >= 2");
  }
  if (n < 0 || n >= dim) {
    throw ParameterError("fock_state: level index " + std::to_string(n) +
                         " outside [0, " + std::to_string(dim) + ")");
  }
  Matrix m = Matrix::Zero(dim, dim);
  m(n, n) = 1.0;
  return DensityMatrix::validated(std::move(m));
}

Vector coherent_vector(Index dim, Complex alpha, double leak_tol) {
  if (dim < 2) {
    throw DimensionError("coherent_vector: dim must be >= 2");
  }
  Vector psi(dim);
  // c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!), built by recursion.
  psi(0) = std::exp(-0.5 * std::norm(alpha));
  for (Index n = 1; n < dim; ++n) {
    psi(n) = psi(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  }
  const double kept = psi.squaredNorm();
  const double leak = 1.0 - kept;
  if (leak > leak_tol) {
    throw TruncationError("coherent state leaks " + fmt(leak) +
                          " of population past dim " + std::to_string(dim));
  }
  psi /= std::sqrt(kept);
  return psi;
}

DensityMatrix coherent_state(Index dim, Complex alpha, double leak_tol) {
  const Vector psi = coherent_vector(dim, alpha, leak_tol);
  return DensityMatrix::validated(psi * psi.adjoint());
}

DensityMatrix thermal_state(Index dim, double nbar, double leak_tol) {
  if (dim < 2) {
    throw DimensionError("thermal_state: dim must be >= 2");
  }
  if (nbar < 0.0) {
    throw ParameterError("thermal_state: nbar must be nonnegative");
  }
  Matrix m = Matrix::Zero(dim, dim);
  if (nbar == 0.0) {
    m(0, 0) = 1.0;
    return DensityMatrix::validated(std::move(m));
  }
  const double ratio = nbar / (1.0 + nbar);
  double w = 1.0 / (1.0 + nbar);  // exact normalization of the full series
  double kept = 0.0;
  for (Index n = 0; n < dim; ++n) {
    m(n, n) = w;
    kept += w;
    w *= ratio;
  }
  const double leak = 1.0 - kept;
  if (leak > leak_tol) {
    throw TruncationError("thermal state (nbar=" + fmt(nbar) +
                          ") leaks " + fmt(leak) +
                          " of population past dim " + std::to_string(dim));
  }
  m /= kept;
  return DensityMatrix::validated(std::move(m));
}

double truncation_leak(const Matrix& rho) {
  const Index d = rho.rows();
  return std::abs(rho(d - 1, d - 1)) + std::abs(rho(d - 2, d - 2));
}

double truncation_leak(const DensityMatrix& rho) {
  return truncation_leak(rho.mat);
}

}  // namespace cqm
