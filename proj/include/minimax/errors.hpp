#pragma once

#include <stdexcept>
#include <string>

namespace minimax {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A user-supplied evaluator threw or returned a malformed result.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Malformed input: wrong dimensions, asymmetric blocks, bad parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class UnknownProblemError : public Error {
 public:
  using Error::Error;
};

// I + sΛDF (or a Newton Jacobian) is numerically singular.
class SingularSolveError : public Error {
 public:
  using Error::Error;
};

// H = DF is singular where an invertible H is required.
class SingularHessianError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Eigencurve labels disagree with the expected type counts.
class ClassificationError : public Error {
 public:
  using Error::Error;
};

// An operation was called outside its documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// The Jacobian-side and region-side stability criteria disagree.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace minimax
