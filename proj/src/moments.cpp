#include "cqm/moments.hpp"

#include <cmath>
#include <limits>

namespace cqm {

MomentParams::MomentParams(double omega_, double lambda_, double kappa_,
                           double hbar_)
    : omega(omega_), lambda(lambda_), kappa(kappa_), hbar(hbar_) {
  if (!(omega > 0.0)) throw ParameterError("moment params: omega must be positive");
  if (lambda < 0.0) throw ParameterError("moment params: lambda must be nonnegative");
  if (!(kappa > 0.0)) throw ParameterError("moment params: kappa must be positive");
  if (hbar < 0.0) throw ParameterError("moment params: hbar must be nonnegative");
}

std::pair<double, double> first_moment_rhs(const MomentState& s,
                                           const MomentParams& p) {
  const double dp = -p.omega * p.omega * s.mean_q - p.gamma() * s.mean_p;
  const double dq = s.mean_p;
  return {dp, dq};
}

std::array<double, 3> second_moment_rhs(const MomentState& s,
                                        const MomentParams& p) {
  const double w2 = p.omega * p.omega;
  const double dp2 = -w2 * s.pq - 2.0 * p.gamma() * s.p2 +
                     p.lambda * p.lambda * w2 / (4.0 * p.kappa);
  const double dpq = -p.gamma() * s.pq + 2.0 * (s.p2 - w2 * s.q2);
  const double dq2 = s.pq + p.kappa * p.hbar * p.hbar;
  return {dp2, dpq, dq2};
}

namespace {

using Five = std::array<double, 5>;

Five pack(const MomentState& s) {
  return {s.mean_p, s.mean_q, s.p2, s.pq, s.q2};
}

MomentState unpack(const Five& v) {
  return MomentState{v[0], v[1], v[2], v[3], v[4]};
}

Five rhs(const Five& v, const MomentParams& p) {
  const MomentState s = unpack(v);
  const auto [dp, dq] = first_moment_rhs(s, p);
  const auto [dp2, dpq, dq2] = second_moment_rhs(s, p);
  return {dp, dq, dp2, dpq, dq2};
}

Five axpy(const Five& x, double a, const Five& y) {
  Five r;
  for (int i = 0; i < 5; ++i) r[i] = x[i] + a * y[i];
  return r;
}

}  // namespace

MomentSeries integrate_moments(const MomentState& s0, const MomentParams& p,
                               double t_final, double dt, Index output_stride) {
  if (!(dt > 0.0)) throw ParameterError("integrate_moments: dt must be positive");
  if (t_final < 0.0) throw ParameterError("integrate_moments: t_final must be nonnegative");
  const Index stride = output_stride > 0 ? output_stride : 1;
  const auto n_steps = static_cast<Index>(std::llround(t_final / dt));

  Five y = pack(s0);
  MomentSeries series;
  series.times.push_back(0.0);
  series.states.push_back(s0);
  for (Index step = 1; step <= n_steps; ++step) {
    const Five k1 = rhs(y, p);
    const Five k2 = rhs(axpy(y, 0.5 * dt, k1), p);
    const Five k3 = rhs(axpy(y, 0.5 * dt, k2), p);
    const Five k4 = rhs(axpy(y, dt, k3), p);
    for (int i = 0; i < 5; ++i) {
      y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(y[i])) {
        throw Error("integrate_moments: step size rejected at t = " +
                    std::to_string(step * dt));
      }
    }
    if (step % stride == 0 || step == n_steps) {
      series.times.push_back(step * dt);
      series.states.push_back(unpack(y));
    }
  }
  return series;
}

MomentState steady_moments(const MomentParams& p) {
  if (p.lambda <= 0.0) {
    throw RegimeError("steady_moments: no steady state without damping "
                      "(lambda = 0)");
  }
  const double h2 = p.hbar * p.hbar;
  MomentState s;
  s.mean_p = 0.0;
  s.mean_q = 0.0;
  s.pq = -p.kappa * h2;
  s.p2 = p.gamma() / (8.0 * p.kappa) + p.omega * p.kappa * h2 / (2.0 * p.lambda);
  s.q2 = (s.p2 + p.gamma() * p.kappa * h2 / 2.0) / (p.omega * p.omega);
  return s;
}

double mean_energy(const MomentState& s, double omega) {
  return 0.5 * (s.p2 + omega * omega * s.q2);
}

double diffusion_negligible_horizon(const MomentParams& p) {
  if (!(p.lambda > 0.0)) {
    throw ParameterError("diffusion_negligible_horizon: lambda must be positive");
  }
  if (p.hbar == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return p.lambda / (8.0 * p.kappa * p.kappa * p.omega * p.hbar * p.hbar);
}

MomentState moments_from_density(const DensityMatrix& rho,
                                 const OscillatorOps& ops) {
  if (rho.dim() != ops.dim()) {
    throw DimensionError("moments_from_density: dimension mismatch");
  }
  const auto real_part = [&](const Matrix& x) {
    const Complex v = expectation(rho, x);
    if (std::abs(v.imag()) > 1e-9) {
      throw StateError("moments_from_density: imaginary part " +
                       std::to_string(v.imag()) + " too large, rho is broken");
    }
    return v.real();
  };
  MomentState s;
  s.mean_p = real_part(ops.P);
  s.mean_q = real_part(ops.Q);
  s.p2 = real_part(ops.P * ops.P);
  s.pq = real_part(ops.P * ops.Q + ops.Q * ops.P);
  s.q2 = real_part(ops.Q * ops.Q);
  return s;
}

}  // namespace cqm
