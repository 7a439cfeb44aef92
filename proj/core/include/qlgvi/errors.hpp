#pragma once

#include <stdexcept>
#include <string>

namespace qlgvi {

// Input outside the domain of a mathematical operation (zero quaternion
// inverse, non-skew vee, non-rotation lift, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A potential evaluated where a mass element coincides with its source.
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Invalid geometry, inertia or simulation configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace qlgvi
