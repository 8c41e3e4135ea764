#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "cqm/measurement.hpp"
#include "cqm/operators.hpp"
#include "cqm/types.hpp"

namespace cqm {

/// Deterministic substream RNG. Stream k of master seed s is an mt19937_64
/// seeded with splitmix64(s + (k+1) * 0x9E3779B97F4A7C15); this is the
/// documented splitting function, so concurrent trajectory execution cannot
/// change results. Normal deviates use Box-Muller on exactly two uniforms
/// (no cached spare), keeping the per-step draw count fixed.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  /// Uniform on (0, 1].
  double uniform01();

  /// Standard normal; consumes exactly two uniforms.
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// One realization of the readout-conditioned evolution.
struct TrajectoryRecord {
  std::vector<double> times;     // recorded grid, starts at 0
  std::vector<Vector> states;    // normalized conditioned pure states
  std::vector<double> readouts;  // one per step (full resolution)
  std::vector<double> log_weight;  // running sum of per-step log norms
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

struct TrajectoryOptions {
  Index record_stride = 1;
  double norm_underflow = 1e-150;  // abort when a step norm falls below this
};

/// Cached one-step propagator for the conditioned evolution. A step applies,
/// in order: unitary half-step exp(-i(H+C)dt/2hbar); measurement factor
/// exp(-kappa dt (A-a)^2); back-action factor exp(-i lambda a B dt/hbar);
/// unitary half-step. The monitored observable acts before its back-action.
class ConditionalStepper {
 public:
  ConditionalStepper(const MeasurementModel& m, const Matrix& h, double dt);

  Index dim() const { return dim_; }
  double dt() const { return dt_; }
  double readout_sigma() const { return sigma_; }

  /// One unnormalized conditioned step in the standard basis.
  Vector step(const Vector& psi, double a) const;

  /// The step as an explicit matrix K_a (for verification work).
  Matrix step_operator(double a) const;

  /// Draws a readout from p(a) ∝ <psi| exp(-2 kappa dt (A-a)^2) |psi>:
  /// an A-eigenvalue picked with the state's weights, then a Gaussian of
  /// variance 1/(4 kappa dt) around it. psi must be normalized.
  double sample_readout(const Vector& psi, RngStream& rng) const;

  // A-eigenbasis representation used by the trajectory loops: chi = Va^dag psi.
  Vector to_a_basis(const Vector& psi) const { return va_adj_ * psi; }
  Vector from_a_basis(const Vector& chi) const { return va_ * chi; }
  const Matrix& a_basis() const { return va_; }
  double sample_readout_a_basis(const Vector& chi, RngStream& rng) const;
  /// Unnormalized step entirely within the A-eigenbasis.
  Vector step_a_basis(const Vector& chi, double a) const;

  const RealVector& a_eigenvalues() const { return alpha_; }

  // Fused stage matrices (A-basis in, A-basis out) for batched stepping:
  // chi' = W3 * diag(back_action(a)) * W2 * diag(meas(a)) * W1 * chi.
  const Matrix& w1() const { return w1_; }
  const Matrix& w2() const { return w2_; }
  const Matrix& w3() const { return w3_; }
  void measurement_weights(double a, RealVector& out) const;
  void back_action_phases(double a, Vector& out) const;

 private:
  Index dim_;
  double dt_;
  double kappa_;
  double lambda_over_hbar_;
  double sigma_;           // readout standard deviation 1/sqrt(4 kappa dt)
  RealVector alpha_;       // eigenvalues of A
  RealVector beta_;        // eigenvalues of B
  Matrix va_, va_adj_;     // A eigenbasis
  Matrix w1_, w2_, w3_;    // fused stage matrices
};

/// Convenience wrappers matching the operation-level contracts; they build a
/// stepper per call, so hot loops should hold a ConditionalStepper instead.
Vector conditional_step(const Vector& psi, const MeasurementModel& m,
                        const Matrix& h, double a, double dt);
double sample_readout(const Vector& psi, const MeasurementModel& m, double dt,
                      RngStream& rng);

TrajectoryRecord run_trajectory(const Vector& psi0, const MeasurementModel& m,
                                const Matrix& h, double t_final, double dt,
                                std::uint64_t seed, std::uint64_t stream = 0,
                                const TrajectoryOptions& opts = {});

/// Mixed initial states are realized by sampling the eigendecomposition of
/// rho0 (one uniform draw, consumed even when rho0 is pure).
TrajectoryRecord run_trajectory(const DensityMatrix& rho0,
                                const MeasurementModel& m, const Matrix& h,
                                double t_final, double dt, std::uint64_t seed,
                                std::uint64_t stream = 0,
                                const TrajectoryOptions& opts = {});

struct EnsembleOptions {
  Index record_stride = 0;  // 0 = auto (~10 recorded points)
  Index batch = 64;         // trajectories marched in lockstep
  Index groups = 16;        // independent partial sums, reduced pairwise
  int threads = 0;          // 0 = hardware concurrency
};

struct EnsembleResult {
  std::vector<double> times;
  std::vector<DensityMatrix> mean_states;
  Index n_traj = 0;
  std::uint64_t seed = 0;
};

/// Plain average of the normalized conditioned projectors over trajectories
/// k = 0..n_traj-1, trajectory k on RNG stream k of `seed`. The reduction is
/// a fixed pairwise tree over contiguous trajectory groups, so the result is
/// independent of thread count.
EnsembleResult ensemble_average(const DensityMatrix& rho0,
                                const MeasurementModel& m, const Matrix& h,
                                double t_final, double dt, Index n_traj,
                                std::uint64_t seed,
                                const EnsembleOptions& opts = {});

}  // namespace cqm
