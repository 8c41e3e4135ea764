#include "cqm/trajectories.hpp"

#include <Eigen/Eigenvalues>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace cqm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(seed + (stream + 1) * 0x9E3779B97F4A7C15ULL)) {}

double RngStream::uniform01() {
  // 53-bit mantissa, mapped to (0, 1] so log() is always finite.
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double RngStream::normal() {
  const double u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

ConditionalStepper::ConditionalStepper(const MeasurementModel& m,
                                       const Matrix& h, double dt)
    : dim_(m.dim()),
      dt_(dt),
      kappa_(m.kappa),
      lambda_over_hbar_(m.lambda / m.hbar),
      sigma_(1.0 / std::sqrt(4.0 * m.kappa * dt)) {
  if (!(dt > 0.0)) {
    throw ParameterError("conditional step: dt must be positive");
  }
  if (h.rows() != dim_ || h.cols() != dim_) {
    throw DimensionError("conditional step: H dimension mismatch");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es_h(hermitized(h + m.C));
  const Matrix u_half =
      es_h.eigenvectors() *
      (-kI * (dt / (2.0 * m.hbar)) * es_h.eigenvalues().array())
          .exp()
          .matrix()
          .asDiagonal() *
      es_h.eigenvectors().adjoint();

  Eigen::SelfAdjointEigenSolver<Matrix> es_a(m.A);
  alpha_ = es_a.eigenvalues();
  va_ = es_a.eigenvectors();
  va_adj_ = va_.adjoint();

  Eigen::SelfAdjointEigenSolver<Matrix> es_b(m.B);
  beta_ = es_b.eigenvalues();
  const Matrix vb = es_b.eigenvectors();

  w1_ = va_adj_ * u_half * va_;
  w2_ = vb.adjoint() * va_;
  w3_ = va_adj_ * u_half * vb;
}

void ConditionalStepper::measurement_weights(double a, RealVector& out) const {
  out = (-kappa_ * dt_ * (alpha_.array() - a).square()).exp();
}

void ConditionalStepper::back_action_phases(double a, Vector& out) const {
  out = (-kI * (lambda_over_hbar_ * a * dt_) * beta_.array()).exp();
}

Vector ConditionalStepper::step_a_basis(const Vector& chi, double a) const {
  RealVector meas(dim_);
  measurement_weights(a, meas);
  Vector phases(dim_);
  back_action_phases(a, phases);
  Vector v = w1_ * chi;
  v.array() *= meas.array();
  v = w2_ * v;
  v.array() *= phases.array();
  return w3_ * v;
}

Vector ConditionalStepper::step(const Vector& psi, double a) const {
  if (psi.size() != dim_) {
    throw DimensionError("conditional step: state dimension mismatch");
  }
  return from_a_basis(step_a_basis(to_a_basis(psi), a));
}

Matrix ConditionalStepper::step_operator(double a) const {
  RealVector meas(dim_);
  measurement_weights(a, meas);
  Vector phases(dim_);
  back_action_phases(a, phases);
  return va_ * w3_ * phases.asDiagonal() * w2_ *
         meas.cast<Complex>().asDiagonal() * w1_ * va_adj_;
}

double ConditionalStepper::sample_readout_a_basis(const Vector& chi,
                                                  RngStream& rng) const {
  // Pick an A eigenvalue with weights |chi_n|^2, then a Gaussian around it.
  const double u = rng.uniform01();
  double cum = 0.0;
  Index pick = dim_ - 1;
  for (Index n = 0; n < dim_; ++n) {
    cum += std::norm(chi(n));
    if (u <= cum) {
      pick = n;
      break;
    }
  }
  return alpha_(pick) + sigma_ * rng.normal();
}

double ConditionalStepper::sample_readout(const Vector& psi,
                                          RngStream& rng) const {
  if (psi.size() != dim_) {
    throw DimensionError("sample_readout: state dimension mismatch");
  }
  return sample_readout_a_basis(to_a_basis(psi), rng);
}

Vector conditional_step(const Vector& psi, const MeasurementModel& m,
                        const Matrix& h, double a, double dt) {
  return ConditionalStepper(m, h, dt).step(psi, a);
}

double sample_readout(const Vector& psi, const MeasurementModel& m, double dt,
                      RngStream& rng) {
  // H is irrelevant for the readout density; a zero stand-in keeps the
  // cached machinery uniform.
  return ConditionalStepper(m, Matrix::Zero(m.dim(), m.dim()), dt)
      .sample_readout(psi, rng);
}

namespace {

Index auto_stride(Index n_steps, Index requested) {
  if (requested > 0) return requested;
  return std::max<Index>(1, n_steps / 10);
}

/// Draws a pure state from rho0's eigendecomposition; consumes one uniform.
Vector sample_initial_state(const DensityMatrix& rho0, RngStream& rng) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitized(rho0.mat));
  const RealVector& evals = es.eigenvalues();
  const double u = rng.uniform01() * evals.sum();
  double cum = 0.0;
  Index pick = evals.size() - 1;
  for (Index n = evals.size() - 1; n >= 0; --n) {  // largest first
    cum += std::max(0.0, evals(n));
    if (u <= cum) {
      pick = n;
      break;
    }
  }
  Vector psi = es.eigenvectors().col(pick);
  psi.normalize();
  return psi;
}

TrajectoryRecord run_trajectory_impl(const Vector& psi0,
                                     const ConditionalStepper& stepper,
                                     double t_final, double dt,
                                     std::uint64_t seed, std::uint64_t stream,
                                     RngStream& rng,
                                     const TrajectoryOptions& opts) {
  const auto n_steps = static_cast<Index>(std::llround(t_final / dt));
  const Index stride = opts.record_stride > 0 ? opts.record_stride : 1;

  TrajectoryRecord rec;
  rec.seed = seed;
  rec.stream = stream;
  rec.readouts.reserve(n_steps);
  rec.log_weight.reserve(n_steps);

  Vector chi = stepper.to_a_basis(psi0.normalized());
  rec.times.push_back(0.0);
  rec.states.push_back(stepper.from_a_basis(chi));

  double log_w = 0.0;
  for (Index step = 1; step <= n_steps; ++step) {
    const double a = stepper.sample_readout_a_basis(chi, rng);
    chi = stepper.step_a_basis(chi, a);
    const double norm = chi.norm();
    if (!(norm > opts.norm_underflow)) {
      throw NormUnderflowError(
          "trajectory state collapsed to zero at t = " +
          std::to_string(step * dt) + " (step norm " + std::to_string(norm) +
          ", readout " + std::to_string(a) + ")");
    }
    chi /= norm;
    log_w += std::log(norm);
    rec.readouts.push_back(a);
    rec.log_weight.push_back(log_w);
    if (step % stride == 0 || step == n_steps) {
      rec.times.push_back(step * dt);
      rec.states.push_back(stepper.from_a_basis(chi));
    }
  }
  return rec;
}

}  // namespace

TrajectoryRecord run_trajectory(const Vector& psi0, const MeasurementModel& m,
                                const Matrix& h, double t_final, double dt,
                                std::uint64_t seed, std::uint64_t stream,
                                const TrajectoryOptions& opts) {
  const ConditionalStepper stepper(m, h, dt);
  RngStream rng(seed, stream);
  return run_trajectory_impl(psi0, stepper, t_final, dt, seed, stream, rng,
                             opts);
}

TrajectoryRecord run_trajectory(const DensityMatrix& rho0,
                                const MeasurementModel& m, const Matrix& h,
                                double t_final, double dt, std::uint64_t seed,
                                std::uint64_t stream,
                                const TrajectoryOptions& opts) {
  const ConditionalStepper stepper(m, h, dt);
  RngStream rng(seed, stream);
  const Vector psi0 = sample_initial_state(rho0, rng);
  return run_trajectory_impl(psi0, stepper, t_final, dt, seed, stream, rng,
                             opts);
}

namespace {

/// Marches trajectories [first, last) in lockstep; adds each recorded
/// projector sum into partials[record_index].
void run_block(const ConditionalStepper& stepper,
               const Eigen::SelfAdjointEigenSolver<Matrix>& rho0_es,
               bool rho0_pure, const Vector& chi0, Index n_steps, Index stride,
               std::uint64_t seed, Index first, Index last,
               std::vector<Matrix>& partials) {
  const Index d = stepper.dim();
  const Index cols = last - first;
  Matrix x(d, cols);

  std::vector<RngStream> rngs;
  rngs.reserve(cols);
  for (Index k = first; k < last; ++k) {
    rngs.emplace_back(seed, static_cast<std::uint64_t>(k));
  }

  for (Index j = 0; j < cols; ++j) {
    if (rho0_pure) {
      rngs[j].uniform01();  // keep draw order identical to the mixed case
      x.col(j) = chi0;
    } else {
      const RealVector& evals = rho0_es.eigenvalues();
      const double u = rngs[j].uniform01() * evals.sum();
      double cum = 0.0;
      Index pick = 0;
      for (Index n = evals.size() - 1; n >= 0; --n) {
        cum += std::max(0.0, evals(n));
        pick = n;
        if (u <= cum) break;
      }
      x.col(j) = stepper.to_a_basis(rho0_es.eigenvectors().col(pick).normalized());
    }
  }

  Index rec_idx = 0;
  const auto record = [&] {
    const Matrix y = stepper.a_basis() * x;  // all columns back to standard basis
    partials[rec_idx].noalias() += y * y.adjoint();
    ++rec_idx;
  };
  record();

  RealVector meas(d);
  Vector phases(d);
  Matrix stage(d, cols);
  std::vector<double> readouts(cols);

  for (Index step = 1; step <= n_steps; ++step) {
    for (Index j = 0; j < cols; ++j) {
      readouts[j] = stepper.sample_readout_a_basis(x.col(j), rngs[j]);
    }
    stage.noalias() = stepper.w1() * x;
    for (Index j = 0; j < cols; ++j) {
      stepper.measurement_weights(readouts[j], meas);
      stage.col(j).array() *= meas.array();
    }
    x.noalias() = stepper.w2() * stage;
    for (Index j = 0; j < cols; ++j) {
      stepper.back_action_phases(readouts[j], phases);
      x.col(j).array() *= phases.array();
    }
    stage.noalias() = stepper.w3() * x;
    for (Index j = 0; j < cols; ++j) {
      const double norm = stage.col(j).norm();
      if (!(norm > 1e-150)) {
        throw NormUnderflowError("ensemble trajectory " +
                                 std::to_string(first + j) +
                                 " collapsed to zero at step " +
                                 std::to_string(step));
      }
      x.col(j) = stage.col(j) / norm;
    }
    if (step % stride == 0 || step == n_steps) {
      record();
    }
  }
}

}  // namespace

EnsembleResult ensemble_average(const DensityMatrix& rho0,
                                const MeasurementModel& m, const Matrix& h,
                                double t_final, double dt, Index n_traj,
                                std::uint64_t seed,
                                const EnsembleOptions& opts) {
  if (n_traj < 1) {
    throw ParameterError("ensemble_average: n_traj must be >= 1");
  }
  const ConditionalStepper stepper(m, h, dt);
  const Index d = stepper.dim();
  const auto n_steps = static_cast<Index>(std::llround(t_final / dt));
  const Index stride = auto_stride(n_steps, opts.record_stride);

  // Recorded grid: 0, stride, 2*stride, ..., plus the final step.
  std::vector<double> times{0.0};
  for (Index step = 1; step <= n_steps; ++step) {
    if (step % stride == 0 || step == n_steps) times.push_back(step * dt);
  }
  const Index n_rec = static_cast<Index>(times.size());

  Eigen::SelfAdjointEigenSolver<Matrix> rho0_es(hermitized(rho0.mat));
  const bool pure = rho0_es.eigenvalues().maxCoeff() > 1.0 - 1e-12;
  Vector chi0 = Vector::Zero(d);
  if (pure) {
    Index top;
    rho0_es.eigenvalues().maxCoeff(&top);
    chi0 = stepper.to_a_basis(rho0_es.eigenvectors().col(top).normalized());
  }

  // Contiguous trajectory groups with private partial sums, reduced by a
  // fixed pairwise tree: bitwise independent of the thread count.
  const Index batch = std::max<Index>(1, opts.batch);
  const Index n_groups =
      std::max<Index>(1, std::min<Index>(opts.groups, (n_traj + batch - 1) / batch));
  const Index per_group = (n_traj + n_groups - 1) / n_groups;

  std::vector<std::vector<Matrix>> group_partials(
      n_groups, std::vector<Matrix>(n_rec, Matrix::Zero(d, d)));

  std::atomic<Index> next_group{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  const auto worker = [&] {
    for (;;) {
      const Index g = next_group.fetch_add(1);
      if (g >= n_groups) return;
      try {
        const Index begin = g * per_group;
        const Index end = std::min(n_traj, begin + per_group);
        for (Index first = begin; first < end; first += batch) {
          const Index last = std::min(end, first + batch);
          run_block(stepper, rho0_es, pure, chi0, n_steps, stride, seed, first,
                    last, group_partials[g]);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  int n_threads = opts.threads > 0
                      ? opts.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(n_groups)));
  {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Pairwise tree over groups, in fixed order.
  std::vector<std::vector<Matrix>*> level;
  level.reserve(n_groups);
  for (auto& gp : group_partials) level.push_back(&gp);
  while (level.size() > 1) {
    std::vector<std::vector<Matrix>*> next;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      for (Index r = 0; r < n_rec; ++r) (*level[i])[r] += (*level[i + 1])[r];
      next.push_back(level[i]);
    }
    if (level.size() % 2 == 1) next.push_back(level.back());
    level = std::move(next);
  }

  EnsembleResult result;
  result.times = std::move(times);
  result.n_traj = n_traj;
  result.seed = seed;
  result.mean_states.reserve(n_rec);
  const double inv_n = 1.0 / static_cast<double>(n_traj);
  for (Index r = 0; r < n_rec; ++r) {
    result.mean_states.push_back(
        DensityMatrix::unchecked(hermitized((*level[0])[r] * inv_n)));
  }
  return result;
}

}  // namespace cqm
