#pragma once

#include <Eigen/Eigenvalues>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "cqm/moments.hpp"
#include "cqm/operators.hpp"
#include "cqm/types.hpp"

namespace cqm::test {

inline Matrix random_hermitian(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) x(i, j) = Complex(g(rng), g(rng));
  return hermitized(x);
}

inline Matrix random_density(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) x(i, j) = Complex(g(rng), g(rng));
  Matrix rho = x * x.adjoint();
  rho /= rho.trace();
  return rho;
}

/// Trace distance (1/2)||rho - sigma||_1 for Hermitian arguments.
inline double trace_distance(const Matrix& rho, const Matrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitized(rho - sigma),
                                           Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Oscillation frequency from interpolated zero crossings; needs >= 2
/// crossings. Returns pi / (mean crossing spacing).
inline double fit_frequency(const std::vector<double>& times,
                            const std::vector<double>& values) {
  std::vector<double> crossings;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if ((values[i - 1] < 0.0) != (values[i] < 0.0)) {
      const double f = values[i - 1] / (values[i - 1] - values[i]);
      crossings.push_back(times[i - 1] + f * (times[i] - times[i - 1]));
    }
  }
  if (crossings.size() < 2) return 0.0;
  const double span = crossings.back() - crossings.front();
  return M_PI * static_cast<double>(crossings.size() - 1) / span;
}

/// Independent moment-ODE oracle: exact solution of the affine 5-moment
/// system via the matrix exponential of the homogeneous 6x6 augmentation.
inline MomentState moments_exact(const MomentState& s0, const MomentParams& p,
                                 double t) {
  const double w2 = p.omega * p.omega;
  const double g = p.lambda * p.omega;
  Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Zero();
  // order: meanP, meanQ, P2, PQ, Q2, 1
  m(0, 0) = -g;
  m(0, 1) = -w2;
  m(1, 0) = 1.0;
  m(2, 2) = -2.0 * g;
  m(2, 3) = -w2;
  m(2, 5) = p.lambda * p.lambda * w2 / (4.0 * p.kappa);
  m(3, 2) = 2.0;
  m(3, 3) = -g;
  m(3, 4) = -2.0 * w2;
  m(4, 3) = 1.0;
  m(4, 5) = p.kappa * p.hbar * p.hbar;
  Eigen::Matrix<double, 6, 1> y;
  y << s0.mean_p, s0.mean_q, s0.p2, s0.pq, s0.q2, 1.0;
  const Eigen::Matrix<double, 6, 1> yt = (m * t).exp() * y;
  return MomentState{yt(0), yt(1), yt(2), yt(3), yt(4)};
}

}  // namespace cqm::test
