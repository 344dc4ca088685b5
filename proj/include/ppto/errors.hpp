#pragma once

#include <stdexcept>
#include <string>

namespace ppto {

/// Input outside the mathematical domain of a formula (alpha <= 2, lambda = 0 where a
/// finite optimum needs interference, ...).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Invalid user-supplied configuration.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical search failed to converge or to bracket a root.
class SolverError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace ppto
