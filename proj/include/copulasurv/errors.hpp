#pragma once

#include <stdexcept>
#include <string>

namespace copulasurv {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Parameter or argument outside its mathematical domain.
class DomainError : public Error {
public:
  using Error::Error;
};

// Evaluation requested at a point where the formula is singular
// (e.g. Gumbel-Hougaard derivatives at s = 0).
class SingularPointError : public DomainError {
public:
  using DomainError::DomainError;
};

// A marginal survival value underflowed below the usable floor.
class UnderflowError : public Error {
public:
  using Error::Error;
};

// An iterative procedure exhausted its budget without meeting tolerances.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

// Monotone likelihood / separation: the optimum runs away to infinity.
class DivergenceError : public ConvergenceError {
public:
  using ConvergenceError::ConvergenceError;
};

// The data cannot identify the requested parameters (e.g. no events,
// no cluster with two or more subjects).
class IdentifiabilityError : public Error {
public:
  using Error::Error;
};

// A numeric consistency check failed (bad Hessian, sign corruption,
// quadrature non-convergence).
class NumericError : public Error {
public:
  using Error::Error;
};

// Malformed input files or CLI arguments.
class InputError : public Error {
public:
  using Error::Error;
};

} // namespace copulasurv
