#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace desplant {

// Base class for all library failures.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent caller input: bad dimensions, unknown symbols,
// invalid files, out-of-contract arguments.
class InputError : public Error {
public:
  using Error::Error;
};

// A state lies on (or numerically too close to) a separating hypersurface
// where a strictly-signed cell is required.
class BoundaryStateError : public Error {
public:
  using Error::Error;
};

// Request exceeds an explicit implementation bound, e.g. candidate-cell
// enumeration for very wide partitions.
class CapacityError : public Error {
public:
  using Error::Error;
};

// Numerical integration produced a non-finite state.
class DivergenceError : public Error {
public:
  using Error::Error;
};

// Rejection sampling found no usable state in the requested region.
class EmptyDomainError : public Error {
public:
  using Error::Error;
};

// The automaton lacks the unique-successor-per-observed-symbol property
// required for state reconstruction.
class NotObservableError : public Error {
public:
  using Error::Error;
};

// A symbol sequence cannot be produced from the given initial state.
// `position` is the 1-based index of the first symbol that fails.
class InadmissibleSequenceError : public Error {
public:
  InadmissibleSequenceError(const std::string& msg, std::size_t position)
      : Error(msg), position_(position) {}
  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

}  // namespace desplant
