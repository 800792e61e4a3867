#pragma once

#include <stdexcept>
#include <string>

namespace sirs {

// Invalid parameters, priors, schedules or configuration files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (schemas, coverage gaps).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failures: non-PSD covariance, IRLS non-convergence, dead chains.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sirs
