#pragma once

#include <stdexcept>
#include <string>

namespace freechan {

/// Invalid grid, scenario or parameter configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called with arguments that violate its contract
/// (wrong representation, mismatched grids, missing ledger data, ...).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A numeric argument lies outside the domain of the function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// File-system failures in checkpoint / output handling.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computed quantity violated a structural identity beyond tolerance
/// (e.g. a self-adjoint expectation with a non-negligible imaginary part).
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace freechan
