#pragma once

#include <stdexcept>
#include <string>

namespace jjosc {

/// Junction current at or past the critical current, or any other argument
/// outside the region where the circuit model is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The exact linearizing control law is undefined (x2 too close to zero).
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Evaluation of the undamped transfer function at its pole.
class ResonanceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or incomplete configuration (scenario files, parameter files).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace jjosc
