#include "cqm/master_equation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SparseCore>
#include <cmath>
#include <random>

namespace cqm {

namespace {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

void require_dim(const MeasurementModel& m, const Matrix& h,
                 const Matrix& rho) {
  if (h.rows() != m.dim() || h.cols() != m.dim() || rho.rows() != m.dim() ||
      rho.cols() != m.dim()) {
    throw DimensionError("master equation: H/rho dimension mismatch with model");
  }
}

/// rhs in the compact form F rho + rho F^dag + kappa l rho l^dag with
/// F = -(i/hbar) H_eff - (kappa/2) l^dag l. Valid for arbitrary rho; equals
/// rhs_lindblad identically.
struct Generator {
  Matrix F;
  Matrix l;
  Matrix ldag;
  SparseMatrix Fs, ls, ldags;
  bool sparse = false;

  Generator(const MeasurementModel& m, const Matrix& h) {
    l = lindblad_operator(m);
    ldag = l.adjoint();
    const Matrix heff = effective_hamiltonian(m, h).op;
    F = -(kI / m.hbar) * heff - (m.kappa / 2.0) * (ldag * l);
    // Fock-space operators are banded; a sparse path keeps the dim-60
    // acceptance runs fast. Threshold: worthwhile below ~1/4 fill.
    const auto nnz = [](const Matrix& x) {
      Index n = 0;
      for (Index c = 0; c < x.cols(); ++c)
        for (Index r = 0; r < x.rows(); ++r)
          if (std::norm(x(r, c)) > 0.0) ++n;
      return n;
    };
    const Index total = F.size();
    if (nnz(F) * 4 < total && nnz(l) * 4 < total) {
      sparse = true;
      Fs = F.sparseView();
      ls = l.sparseView();
      ldags = ldag.sparseView();
    }
  }

  // out = F rho + rho F^dag + kap l rho l^dag, using tmp as scratch.
  void apply_hermitian(const Matrix& rho, double kap, Matrix& out,
                       Matrix& tmp) const {
    if (sparse) {
      tmp.noalias() = Fs * rho;
      out = tmp + tmp.adjoint();
      tmp.noalias() = ls * rho;
      out.noalias() += kap * (tmp * ldags);
    } else {
      tmp.noalias() = F * rho;
      out = tmp + tmp.adjoint();
      tmp.noalias() = l * rho;
      out.noalias() += kap * (tmp * ldag);
    }
  }
};

double min_eigenvalue_herm(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(x, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

Matrix rhs_double_commutator(const MeasurementModel& m, const Matrix& h,
                             const Matrix& rho) {
  require_dim(m, h, rho);
  const double hb = m.hbar;
  const Matrix hc = h + m.C;
  Matrix out = -(kI / hb) * commutator(hc, rho);
  out -= (m.kappa / 2.0) * commutator(m.A, commutator(m.A, rho));
  out -= (m.lambda * m.lambda / (8.0 * m.kappa * hb * hb)) *
         commutator(m.B, commutator(m.B, rho));
  out -= (kI * m.lambda / (2.0 * hb)) *
         commutator(m.B, anticommutator(m.A, rho));
  return out;
}

Matrix rhs_lindblad(const MeasurementModel& m, const Matrix& h,
                    const Matrix& rho) {
  require_dim(m, h, rho);
  const Matrix heff = effective_hamiltonian(m, h).op;
  const Matrix l = lindblad_operator(m);
  const Matrix ldag = l.adjoint();
  const Matrix g = ldag * l;
  Matrix out = -(kI / m.hbar) * (heff * rho - rho * heff);
  out -= (m.kappa / 2.0) * (g * rho - 2.0 * (l * rho * ldag) + rho * g);
  return out;
}

Vector vec_rowmajor(const Matrix& x) {
  const Index d = x.rows();
  Vector v(d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) v(i * d + j) = x(i, j);
  return v;
}

Matrix unvec_rowmajor(const Vector& v, Index dim) {
  if (v.size() != dim * dim) {
    throw DimensionError("unvec: length does not match dim^2");
  }
  Matrix x(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) x(i, j) = v(i * dim + j);
  return x;
}

namespace {

/// Adds coeff * (X rho Y) to the vectorized generator: with row-major vec,
/// L[(i,j),(k,l)] += coeff * X(i,k) * Y(l,j).
void add_sandwich(Matrix& L, Complex coeff, const Matrix& x, const Matrix& y) {
  const Index d = x.rows();
  for (Index i = 0; i < d; ++i) {
    for (Index k = 0; k < d; ++k) {
      const Complex xv = coeff * x(i, k);
      if (xv == Complex(0.0)) continue;
      for (Index l = 0; l < d; ++l) {
        for (Index j = 0; j < d; ++j) {
          L(i * d + j, k * d + l) += xv * y(l, j);
        }
      }
    }
  }
}

}  // namespace

Liouvillian build_liouvillian(const MeasurementModel& m, const Matrix& h,
                              Index dim_sq_cap) {
  if (h.rows() != m.dim() || h.cols() != m.dim()) {
    throw DimensionError("build_liouvillian: H dimension mismatch");
  }
  const Index d = m.dim();
  if (d * d > dim_sq_cap) {
    throw DimensionError("build_liouvillian: dim^2 = " + std::to_string(d * d) +
                         " exceeds cap " + std::to_string(dim_sq_cap));
  }
  const Matrix id = Matrix::Identity(d, d);
  const Matrix heff = effective_hamiltonian(m, h).op;
  const Matrix l = lindblad_operator(m);
  const Matrix ldag = l.adjoint();
  const Matrix g = ldag * l;

  Matrix L = Matrix::Zero(d * d, d * d);
  add_sandwich(L, -kI / m.hbar, heff, id);
  add_sandwich(L, kI / m.hbar, id, heff);
  add_sandwich(L, Complex(-m.kappa / 2.0), g, id);
  add_sandwich(L, Complex(-m.kappa / 2.0), id, g);
  add_sandwich(L, Complex(m.kappa), l, ldag);

  return Liouvillian{m, h, std::move(L)};
}

EvolutionSeries evolve(const DensityMatrix& rho0, const MeasurementModel& m,
                       const Matrix& h, double t_final, double dt,
                       const EvolveOptions& opts) {
  require_dim(m, h, rho0.mat);
  if (!(dt > 0.0)) {
    throw ParameterError("evolve: dt must be positive");
  }
  if (t_final < 0.0) {
    throw ParameterError("evolve: t_final must be nonnegative");
  }
  const Index stride = opts.output_stride > 0 ? opts.output_stride : 1;
  const auto n_steps = static_cast<Index>(std::llround(t_final / dt));

  const Generator gen(m, h);
  const double kap = m.kappa;
  const Index d = m.dim();

  Matrix rho = rho0.mat;
  Matrix k(d, d), acc(d, d), stage(d, d), tmp(d, d);

  EvolutionSeries series;
  series.times.reserve(n_steps / stride + 2);
  double step_herm = hermiticity_residual(rho);
  series.max_herm_residual = step_herm;
  series.max_trace_drift = std::abs(rho.trace() - Complex(1.0));

  const auto record = [&](double t) {
    StepDiagnostics diag;
    diag.t = t;
    diag.trace_drift = std::abs(rho.trace() - Complex(1.0));
    diag.herm_residual = step_herm;  // before this step's re-symmetrization
    diag.min_eigenvalue = min_eigenvalue_herm(rho);
    diag.leak = truncation_leak(rho);
    if (diag.min_eigenvalue < -opts.positivity_tol) {
      if (opts.abort_on_positivity) {
        throw StateError("evolve: positivity violated, min eigenvalue " +
                         std::to_string(diag.min_eigenvalue));
      }
      series.flagged = true;
    }
    if (diag.trace_drift > opts.trace_tol || diag.leak > opts.leak_warn) {
      series.flagged = true;
    }
    series.times.push_back(t);
    series.diagnostics.push_back(diag);
    DensityMatrix snap = DensityMatrix::unchecked(rho);
    snap.min_eigenvalue = diag.min_eigenvalue;  // reuse, avoids a second solve
    series.states.push_back(std::move(snap));
  };

  record(0.0);
  for (Index step = 1; step <= n_steps; ++step) {
    gen.apply_hermitian(rho, kap, k, tmp);  // k1
    acc = k;
    stage = rho + (0.5 * dt) * k;
    gen.apply_hermitian(stage, kap, k, tmp);  // k2
    acc += 2.0 * k;
    stage = rho + (0.5 * dt) * k;
    gen.apply_hermitian(stage, kap, k, tmp);  // k3
    acc += 2.0 * k;
    stage = rho + dt * k;
    gen.apply_hermitian(stage, kap, k, tmp);  // k4
    acc += k;
    rho += (dt / 6.0) * acc;
    step_herm = hermiticity_residual(rho);
    series.max_herm_residual = std::max(series.max_herm_residual, step_herm);
    rho = 0.5 * (rho + rho.adjoint().eval());

    const double drift = std::abs(rho.trace() - Complex(1.0));
    series.max_trace_drift = std::max(series.max_trace_drift, drift);
    if (drift > 1e-3 || !std::isfinite(drift)) {
      throw Error("evolve: step size rejected at t = " +
                  std::to_string(step * dt) + ", trace drift " +
                  std::to_string(drift) + " (reduce dt)");
    }
    if (step % stride == 0 || step == n_steps) {
      record(step * dt);
    }
  }
  if (series.max_trace_drift > opts.trace_tol) {
    series.flagged = true;
  }
  series.final_trace_drift = std::abs(rho.trace() - Complex(1.0));
  return series;
}

SteadyStateResult steady_state(const MeasurementModel& m, const Matrix& h,
                               const SteadyStateOptions& opts) {
  const Liouvillian liou = build_liouvillian(m, h, opts.dim_sq_cap);
  const Index d = m.dim();
  const Index n = d * d;

  // Degeneracy probe first: shifted inverse iteration amplifies every kernel
  // direction equally, so two random starts land on the same trace-normalized
  // vector only when the kernel is one-dimensional.
  {
    const double scale = liou.matrix.cwiseAbs().maxCoeff();
    const Matrix shifted =
        liou.matrix - (1e-10 * scale) * Matrix::Identity(n, n);
    const Eigen::PartialPivLU<Matrix> lu(shifted);
    std::mt19937_64 rng(0x517ead);
    std::normal_distribution<double> g(0.0, 1.0);
    const auto probe = [&]() -> Vector {
      Vector v(n);
      for (Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
      Vector y = lu.solve(v);
      y /= y.norm();
      y = lu.solve(y);
      Complex tr = 0.0;
      for (Index i = 0; i < d; ++i) tr += y(i * d + i);
      if (std::abs(tr) < 1e-10 * y.norm()) {
        return y / y.norm();  // traceless kernel direction: degenerate anyway
      }
      return y / tr;
    };
    const Vector y1 = probe();
    const Vector y2 = probe();
    if (!y1.allFinite() || !y2.allFinite()) {
      throw KernelError("steady_state: no convergence (singular solve)");
    }
    const double disagreement = (y1 - y2).cwiseAbs().maxCoeff();
    const double kernel_scale = std::max(1.0, y1.cwiseAbs().maxCoeff());
    if (disagreement > opts.degeneracy_tol * kernel_scale) {
      throw KernelError("steady_state: degenerate kernel (inverse-iteration "
                        "probes disagree by " + std::to_string(disagreement) +
                        ")");
    }
  }

  // Unique kernel: solve with the trace row substituted for one equation.
  Matrix M = liou.matrix;
  M.row(0).setZero();
  for (Index i = 0; i < d; ++i) M(0, i * d + i) = 1.0;
  Vector b = Vector::Zero(n);
  b(0) = 1.0;
  const Vector x1 = Eigen::PartialPivLU<Matrix>(M).solve(b);
  if (!x1.allFinite()) {
    throw KernelError("steady_state: no convergence (singular solve)");
  }

  Matrix rho = hermitized(unvec_rowmajor(x1, d));
  const Complex tr = rho.trace();
  if (std::abs(tr) < 1e-300) {
    throw KernelError("steady_state: kernel vector has vanishing trace");
  }
  rho /= tr;

  const double residual = (liou.matrix * vec_rowmajor(rho)).cwiseAbs().maxCoeff();
  if (residual > opts.residual_tol) {
    throw KernelError("steady_state: residual " + std::to_string(residual) +
                      " exceeds tolerance");
  }

  SteadyStateResult result{DensityMatrix::unchecked(std::move(rho)), residual,
                           0.0, false};
  result.truncation_leak = truncation_leak(result.rho);
  result.leak_flagged = result.truncation_leak > opts.leak_threshold;
  return result;
}

}  // namespace cqm
