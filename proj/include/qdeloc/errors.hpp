#pragma once

#include <stdexcept>
#include <string>

namespace qdeloc {

/// A requested size exceeds a hard resource cap (group order, bond dimension, amplitudes).
class CapacityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A linear system that should be invertible is singular for the given parameters.
class DegeneracyError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Gate placement or site indexing that is inconsistent with the chain.
class LayoutError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Region shapes not supported by the reduced-density-matrix code.
class UnsupportedRegionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Mismatched or invalid configuration (engine parameters, table dimensions).
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Too few usable points, or non-positive values, inside a fit window.
class FitWindowError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace qdeloc
