#pragma once

#include <stdexcept>
#include <string>

namespace pxlab {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs violate an operation's documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (non-convergence, linear-solve breakdown).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace pxlab
