#pragma once

#include <stdexcept>
#include <string>

namespace lzs {

/// Argument outside the documented validity envelope of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure could not produce a trustworthy result
/// (overflowing rate law, degenerate Markov chain, step-control failure,
/// unconverged grid).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RateOverflow : public SolverError {
 public:
  using SolverError::SolverError;
};

class DegenerateChain : public SolverError {
 public:
  using SolverError::SolverError;
};

class IntegrationError : public SolverError {
 public:
  using SolverError::SolverError;
};

class ResolutionError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Malformed or inconsistent configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lzs
