#pragma once

#include <vector>

#include "cqm/measurement.hpp"
#include "cqm/operators.hpp"
#include "cqm/types.hpp"

namespace cqm {

/// Double-commutator form of the generator:
///   -(i/hbar)[H + C, rho] - (kappa/2)[A,[A,rho]]
///   - (lambda^2/(8 kappa hbar^2))[B,[B,rho]]
///   - (i lambda/(2 hbar))[B, {A, rho}].
Matrix rhs_double_commutator(const MeasurementModel& m, const Matrix& h,
                             const Matrix& rho);

/// Lindblad form of the same generator, built from l = A - i(lambda/2k hbar)B
/// and the renormalized Hamiltonian H + C + shift. The dissipator uses the
/// canonical ordering -(kappa/2)(l+ l rho - 2 l rho l+ + rho l+ l), which is
/// algebraically identical to the double-commutator form.
Matrix rhs_lindblad(const MeasurementModel& m, const Matrix& h,
                    const Matrix& rho);

/// Vectorized generator. Convention: row-major vectorization,
/// vec(rho)[i*dim + j] = rho(i, j), so X rho Y maps to kron(X, Y^T).
struct Liouvillian {
  MeasurementModel model;
  Matrix H;
  Matrix matrix;  // dim^2 x dim^2
  Index dim() const { return H.rows(); }
};

Liouvillian build_liouvillian(const MeasurementModel& m, const Matrix& h,
                              Index dim_sq_cap = 4096);

/// Row-major vec / unvec helpers (the pinned convention).
Vector vec_rowmajor(const Matrix& x);
Matrix unvec_rowmajor(const Vector& v, Index dim);

struct StepDiagnostics {
  double t = 0.0;
  double trace_drift = 0.0;     // |tr(rho) - 1|
  double herm_residual = 0.0;   // before re-symmetrization
  double min_eigenvalue = 0.0;  // of the recorded state
  double leak = 0.0;            // population of top two Fock levels
};

struct EvolutionSeries {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<StepDiagnostics> diagnostics;  // one per recorded time
  bool flagged = false;                      // any diagnostic out of tolerance
  double final_trace_drift = 0.0;
  // maxima tracked at every internal step, not just recorded ones
  double max_trace_drift = 0.0;
  double max_herm_residual = 0.0;  // before per-step re-symmetrization
};

struct EvolveOptions {
  Index output_stride = 1;       // record every n-th step
  double positivity_tol = 1e-6;  // flag when min eigenvalue < -tol
  double trace_tol = 1e-8;       // flag when |tr - 1| exceeds this
  double leak_warn = 1e-6;       // flag when truncation leak exceeds this
  bool abort_on_positivity = false;
};

/// Fixed-step classical RK4 on d rho/dt = rhs_lindblad(rho), with per-step
/// re-symmetrization. Step-size heuristic: dt <= 0.01 / max(omega spectral
/// scale, kappa ||A||^2, gamma); callers pick dt, evolve rejects dt <= 0.
EvolutionSeries evolve(const DensityMatrix& rho0, const MeasurementModel& m,
                       const Matrix& h, double t_final, double dt,
                       const EvolveOptions& opts = {});

struct SteadyStateResult {
  DensityMatrix rho;
  double residual = 0.0;  // ||L vec(rho)||_inf
  double truncation_leak = 0.0;
  bool leak_flagged = false;
};

struct SteadyStateOptions {
  double residual_tol = 1e-10;
  double leak_threshold = 1e-6;
  // disagreement bound for the two inverse-iteration probes; the shifted
  // solve is conditioned at ~1e10, so agreement below ~1e-5 means unique
  double degeneracy_tol = 1e-4;
  Index dim_sq_cap = 4096;
};

/// Null vector of the Liouvillian, Hermitized and normalized to unit trace.
/// Throws KernelError when the kernel is degenerate or the residual does not
/// meet tolerance; flags (not throws) when the steady state leaks past the
/// truncation.
SteadyStateResult steady_state(const MeasurementModel& m, const Matrix& h,
                               const SteadyStateOptions& opts = {});

}  // namespace cqm
