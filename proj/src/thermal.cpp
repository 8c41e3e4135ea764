#include "cqm/thermal.hpp"

#include <cmath>

namespace cqm {

ThermalSpec::ThermalSpec(double temperature_, double omega_, double hbar_,
                         double kB_)
    : temperature(temperature_), omega(omega_), hbar(hbar_), kB(kB_) {
  if (!(temperature > 0.0)) throw ParameterError("thermal spec: temperature must be positive");
  if (!(omega > 0.0)) throw ParameterError("thermal spec: omega must be positive");
  if (!(hbar > 0.0)) throw ParameterError("thermal spec: hbar must be positive");
  if (!(kB > 0.0)) throw ParameterError("thermal spec: kB must be positive");
}

namespace {

double coth(double x) { return 1.0 / std::tanh(x); }

}  // namespace

double nbar(const ThermalSpec& spec) {
  const double x = spec.hbar * spec.omega / (spec.kB * spec.temperature);
  if (x > 700.0) {
    return 0.0;  // exp would overflow; occupation is numerically zero
  }
  return 1.0 / std::expm1(x);
}

double diffusion_coefficient(double gamma, const ThermalSpec& spec) {
  if (gamma < 0.0) throw ParameterError("diffusion_coefficient: gamma must be nonnegative");
  if (gamma == 0.0) return 0.0;
  const double x = spec.hbar * spec.omega / (2.0 * spec.kB * spec.temperature);
  return 0.5 * gamma * spec.hbar * spec.omega * coth(x);
}

double lambda_from_temperature(double kappa, const ThermalSpec& spec) {
  if (!(kappa > 0.0)) throw ParameterError("lambda_from_temperature: kappa must be positive");
  const double x = spec.hbar * spec.omega / (2.0 * spec.kB * spec.temperature);
  return 4.0 * kappa * spec.hbar * coth(x);
}

double temperature_from_lambda(double lambda, double kappa, double omega,
                               double hbar, double kB) {
  if (!(kappa > 0.0)) throw ParameterError("temperature_from_lambda: kappa must be positive");
  if (!(omega > 0.0) || !(hbar > 0.0) || !(kB > 0.0)) {
    throw ParameterError("temperature_from_lambda: omega, hbar, kB must be positive");
  }
  const double y = lambda / (4.0 * kappa * hbar);
  if (y <= 1.0) {
    throw RegimeError(
        "temperature_from_lambda: lambda <= 4 kappa hbar (quantum regime), "
        "no thermal equilibrium exists");
  }
  // arccoth(y) = atanh(1/y) for y > 1.
  return hbar * omega / (2.0 * kB * std::atanh(1.0 / y));
}

MeasurementRegime regime_classify(double lambda, double kappa, double hbar) {
  if (!(kappa > 0.0)) throw ParameterError("regime_classify: kappa must be positive");
  if (!(hbar > 0.0)) throw ParameterError("regime_classify: hbar must be positive");
  const double boundary = 4.0 * hbar * kappa;
  if (std::abs(lambda - boundary) <= 1e-12 * std::max(lambda, boundary)) {
    return MeasurementRegime::Boundary;
  }
  return lambda > boundary ? MeasurementRegime::Classical
                           : MeasurementRegime::Quantum;
}

const char* to_string(MeasurementRegime r) {
  switch (r) {
    case MeasurementRegime::Classical: return "classical";
    case MeasurementRegime::Quantum: return "quantum";
    case MeasurementRegime::Boundary: return "boundary";
  }
  return "unknown";
}

}  // namespace cqm
