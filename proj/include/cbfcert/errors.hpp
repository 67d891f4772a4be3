#pragma once

#include <stdexcept>
#include <string>

namespace cbfcert {

/// Invalid or inconsistent configuration values (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Experiment setup could not be completed, e.g. an initial-state domain
/// too crowded for rejection sampling (CLI exit code 3).
class SetupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed numeric input to a pure routine (empty sample, NaN data).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The QP solver failed in a way that should be impossible (CLI exit code 4).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cbfcert
