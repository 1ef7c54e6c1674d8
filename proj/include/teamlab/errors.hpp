#pragma once

#include <stdexcept>
#include <string>

namespace teamlab {

/// Invalid experiment or model configuration (bad sizes, unknown keys, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a closed-form quantity.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Statistical estimate could not be formed from the available samples.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested joint model exceeds the enumeration cap.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace teamlab
