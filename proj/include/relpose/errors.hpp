#pragma once

#include <stdexcept>
#include <string>

namespace relpose {

/// Invalid or inconsistent user-supplied configuration.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Data-dependent numerical failure during a run (as opposed to a caller
/// contract violation, which throws std::invalid_argument).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Implicit solve did not reach tolerance within the iteration budget.
struct NewtonError : NumericalError {
  NewtonError(const std::string& msg, double residual_, int iterations_)
      : NumericalError(msg), residual(residual_), iterations(iterations_) {}
  double residual;
  int iterations;
};

/// Feature geometry too poor to determine the requested quantity.
struct DegenerateGeometryError : NumericalError {
  explicit DegenerateGeometryError(const std::string& msg)
      : NumericalError(msg) {}
};

/// Filesystem read/write failure.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace relpose
