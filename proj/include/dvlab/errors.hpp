#pragma once

#include <stdexcept>
#include <string>

namespace dvlab {

/// Invalid arguments: dimension mismatches, out-of-range parameters, bad
/// body text. Maps to CLI exit code 1.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The operation is not defined for this body (e.g. a seminorm polytope
/// passed where a norm is required).
class UnsupportedBody : public UsageError {
public:
  using UsageError::UsageError;
};

/// A numerical procedure could not produce a result (too few usable
/// points, degenerate data). Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InsufficientData : public NumericalError {
public:
  using NumericalError::NumericalError;
};

} // namespace dvlab
