#pragma once

#include <stdexcept>
#include <string>

namespace ropex {

/// Invalid input or configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A step-size schedule violates the conditions its policy requires (exit code 3).
class ScheduleViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An oracle produced a non-finite value or is wired up inconsistently (exit code 4).
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative reference computation ran out of budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ropex
