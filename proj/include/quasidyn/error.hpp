#pragma once

#include <stdexcept>
#include <string>

namespace qd {

// Base for all library errors. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad parameter, out-of-range level, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Asked for more continued-fraction coefficients than are materialized.
class DepthExhausted : public Error {
 public:
  using Error::Error;
};

// 64-bit convergent arithmetic would wrap.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// n*alpha + theta (mod 1) too close to an endpoint of [1-alpha,1) to decide.
class UndecidableBoundary : public Error {
 public:
  using Error::Error;
};

// Site or length outside the sampled window, or window lacks the required margin.
class WindowError : public Error {
 public:
  using Error::Error;
};

// k-partition could not be built. Existence and uniqueness are theorems, so this is a bug.
class ParseFailure : public Error {
 public:
  using Error::Error;
};

class CountMismatch : public Error {
 public:
  using Error::Error;
};

class AmbiguousContainment : public Error {
 public:
  using Error::Error;
};

class InsufficientSampling : public Error {
 public:
  using Error::Error;
};

class EigenSolveError : public Error {
 public:
  using Error::Error;
};

class LeakageExceeded : public Error {
 public:
  LeakageExceeded(const std::string& what, long suggested_half_width)
      : Error(what), suggested_half_width_(suggested_half_width) {}
  long suggested_half_width() const { return suggested_half_width_; }

 private:
  long suggested_half_width_;
};

}  // namespace qd
