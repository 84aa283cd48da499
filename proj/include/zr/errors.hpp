#pragma once

#include <stdexcept>
#include <string>

namespace zr {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition (wrong representation, grid
// mismatch, missing slots, violated hypothesis).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Invalid or unknown configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numerical singularity in a closed-form expression (e.g. division by b1-b2).
class SingularityError : public Error {
 public:
  using Error::Error;
};

}  // namespace zr
