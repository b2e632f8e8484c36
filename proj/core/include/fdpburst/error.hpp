#pragma once

#include <stdexcept>
#include <string>

namespace fdpburst {

/// Argument outside the mathematical domain of a numerical routine.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An experiment configuration violates one of its invariants.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The Simes-point search could not bracket or evaluate a crossing.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Factor-model fitting failed (rank deficiency, bad shape).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (JSON or CSV). Carries a human-readable location.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fdpburst
