#pragma once

#include "cqm/types.hpp"

namespace cqm {

struct ThermalSpec {
  double temperature = 0.0;  // energy scale k_B * T
  double omega = 0.0;
  double hbar = 0.0;
  double kB = 1.0;

  ThermalSpec(double temperature_, double omega_, double hbar_,
              double kB_ = 1.0);
};

/// Bose occupation n = 1/(exp(hbar omega / kB T) - 1); underflows to 0 when
/// the exponent exceeds 700.
double nbar(const ThermalSpec& spec);

/// Fluctuation-dissipation: D = (gamma hbar omega / 2) coth(hbar omega / 2 kB T).
double diffusion_coefficient(double gamma, const ThermalSpec& spec);

/// lambda = 4 kappa hbar coth(hbar omega / 2 kB T); always > 4 kappa hbar at
/// finite temperature.
double lambda_from_temperature(double kappa, const ThermalSpec& spec);

/// Inverse of lambda_from_temperature. Throws RegimeError when
/// lambda <= 4 kappa hbar: the quantum regime admits no thermal equilibrium.
double temperature_from_lambda(double lambda, double kappa, double omega,
                               double hbar, double kB = 1.0);

enum class MeasurementRegime { Classical, Quantum, Boundary };

/// Classical when lambda > 4 hbar kappa, Quantum when smaller, Boundary
/// within relative 1e-12.
MeasurementRegime regime_classify(double lambda, double kappa, double hbar);

const char* to_string(MeasurementRegime r);

}  // namespace cqm
