#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mismatched or invalid matrix dimensions.
struct DimensionError : Error {
  using Error::Error;
};

/// A scalar parameter outside its admissible range.
struct ParameterError : Error {
  using Error::Error;
};

/// Fock-space truncation too small for the requested state or run.
struct TruncationError : Error {
  using Error::Error;
};

/// A state failed its structural invariants (trace, Hermiticity, positivity).
struct StateError : Error {
  using Error::Error;
};

/// Parameter regime the model does not cover (overdamped, no thermal
/// equilibrium).
struct RegimeError : Error {
  using Error::Error;
};

/// Steady-state kernel computation failed (degenerate or non-convergent).
struct KernelError : Error {
  using Error::Error;
};

/// Trajectory weight underflowed.
struct NormUnderflowError : Error {
  using Error::Error;
};

/// Config parsing/validation failure; carries every error found, not just the
/// first.
struct ConfigError : Error {
  explicit ConfigError(std::vector<std::string> issues_)
      : Error(join(issues_)), issues(std::move(issues_)) {}
  std::vector<std::string> issues;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "config invalid:";
    for (const auto& s : v) {
      out += "\n  " + s;
    }
    return out;
  }
};

}  // namespace cqm
