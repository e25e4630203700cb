#pragma once

#include <stdexcept>
#include <string>

namespace dtrans {

/// Malformed input: wrong dimension, invalid parameter, bad point.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public ValidationError {
 public:
  DimensionMismatch(std::size_t a, std::size_t b)
      : ValidationError("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

/// A computation left its domain of validity (singular matrix, log of a
/// nonpositive number, degenerate regularity constant).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dtrans
