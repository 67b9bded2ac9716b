#pragma once

#include <stdexcept>
#include <string>

namespace ecstat {

/// Input violated a documented precondition or data invariant.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical procedure failed (no root in bracket, divergent quadrature,
/// rank-deficient solve, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// File could not be read, written or parsed.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ecstat
