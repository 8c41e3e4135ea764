#pragma once

#include <array>
#include <utility>
#include <vector>

#include "cqm/operators.hpp"
#include "cqm/types.hpp"

namespace cqm {

/// The five oscillator moments <P>, <Q>, <P^2>, <PQ+QP>, <Q^2>.
struct MomentState {
  double mean_p = 0.0;
  double mean_q = 0.0;
  double p2 = 0.0;
  double pq = 0.0;  // <PQ + QP>
  double q2 = 0.0;
};

/// Parameters of the moment ODEs. hbar = 0 is admitted here (and only here)
/// to express the classical limit literally.
struct MomentParams {
  double omega = 0.0;
  double lambda = 0.0;
  double kappa = 0.0;
  double hbar = 0.0;

  MomentParams(double omega_, double lambda_, double kappa_, double hbar_);

  double gamma() const { return lambda * omega; }  // damping constant
};

/// d<P>/dt = -omega^2 <Q> - lambda omega <P>;  d<Q>/dt = <P>.
std::pair<double, double> first_moment_rhs(const MomentState& s,
                                           const MomentParams& p);

/// d<P^2>/dt  = -omega^2 <PQ+QP> - 2 lambda omega <P^2> + lambda^2 omega^2/(4 kappa)
/// d<PQ+QP>/dt = -lambda omega <PQ+QP> + 2(<P^2> - omega^2 <Q^2>)
/// d<Q^2>/dt  = <PQ+QP> + kappa hbar^2.
std::array<double, 3> second_moment_rhs(const MomentState& s,
                                        const MomentParams& p);

struct MomentSeries {
  std::vector<double> times;
  std::vector<MomentState> states;
};

/// Fixed-step RK4 on the five-moment linear ODE.
MomentSeries integrate_moments(const MomentState& s0, const MomentParams& p,
                               double t_final, double dt,
                               Index output_stride = 1);

/// Fixed point of the second-moment system (means zero):
///   <PQ+QP> = -kappa hbar^2
///   <P^2>   = lambda omega/(8 kappa) + omega kappa hbar^2/(2 lambda)
///   omega^2 <Q^2> = <P^2> + lambda omega kappa hbar^2 / 2.
/// Throws RegimeError for lambda = 0 (no damping, no steady state).
MomentState steady_moments(const MomentParams& p);

/// (1/2)(<P^2> + omega^2 <Q^2>).
double mean_energy(const MomentState& s, double omega);

/// Horizon t* = lambda / (8 kappa^2 omega hbar^2) below which position
/// diffusion is negligible against the classical steady spread; +infinity
/// when hbar = 0.
double diffusion_negligible_horizon(const MomentParams& p);

/// Extracts the five moments from a density matrix; throws StateError if any
/// imaginary part exceeds 1e-9.
MomentState moments_from_density(const DensityMatrix& rho,
                                 const OscillatorOps& ops);

}  // namespace cqm
