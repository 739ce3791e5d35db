#pragma once

#include <stdexcept>
#include <string>

namespace nrsfm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Graph or lifting structure is inconsistent (missing edge, missing slot).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A reconstruction method was asked to run on data it cannot handle,
/// e.g. a depth-parameterised method on a scene with hidden points.
class IncompatibleData : public Error {
 public:
  using Error::Error;
};

/// Synthetic generation failed (pose retries exhausted, LM stagnation).
class GenerationError : public Error {
 public:
  using Error::Error;
};

/// Solver did not reach an optimal status, or extraction was refused.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace nrsfm
