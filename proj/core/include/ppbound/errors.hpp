#pragma once

#include <stdexcept>
#include <string>

namespace ppbound {

/// Evaluation point or parameter outside the mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid experiment or model configuration (bad parameters, inadmissible k).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input data, e.g. a loaded point outside the unit cube.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every weight kappa_r(x) vanished at the requested point.
class DegenerateWeightsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The sample carries no information (no points, or a_hat == 0).
class DegenerateSampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ppbound
