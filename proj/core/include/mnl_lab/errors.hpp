#pragma once

#include <stdexcept>
#include <string>

namespace mnl_lab {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid user-facing configuration (bad dimensions, empty seed list, ...).
class ConfigError : public Error {
public:
  using Error::Error;
};

// A utility upper bound cannot be made strictly decreasing with slope <= -L0
// (the estimate is wildly out of range).
class ConstructionError : public Error {
public:
  using Error::Error;
};

// The confidence bonus is (numerically) degenerate: a3*a5 - a4^2 is below the
// degeneracy threshold, so the square-root term is affine and the polynomial
// candidate solver does not apply. Callers fall back to linear handling.
class DegenerateBonusError : public Error {
public:
  using Error::Error;
};

// An iterative solver exhausted its iteration budget without meeting its
// tolerance.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

// A ridge-regularized linear solve failed.
class SingularMatrixError : public Error {
public:
  using Error::Error;
};

// Not enough data for the requested computation (e.g. slope fit on too few
// checkpoints).
class InsufficientDataError : public Error {
public:
  using Error::Error;
};

}  // namespace mnl_lab
