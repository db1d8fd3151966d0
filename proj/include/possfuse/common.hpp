#pragma once

#include <stdexcept>

namespace possfuse {

// Absolute tolerance for floating-point comparisons on [0,1]-scale quantities.
inline constexpr double kDefaultTolerance = 1e-9;

// Mixture components whose weight falls below this after rescaling are dropped.
inline constexpr double kPruneThreshold = 1e-12;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two values that must live on the same state space do not.
class SpaceMismatch : public Error {
 public:
  using Error::Error;
};

// Every component was pruned; the zero constraint is not a representable value.
class ZeroConstraint : public Error {
 public:
  using Error::Error;
};

// Fusion normalizer vanished: the inputs are in total conflict.
class IncompatibleConstraints : public Error {
 public:
  using Error::Error;
};

// A fusion kernel violates its structural invariants.
class KernelError : public Error {
 public:
  using Error::Error;
};

// Kernel associativity verification was requested and failed.
class KernelNotAssociative : public Error {
 public:
  using Error::Error;
};

// A document could not be parsed into a valid object.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A point map fails to cover its domain or maps outside its codomain.
class MapError : public Error {
 public:
  using Error::Error;
};

}  // namespace possfuse
