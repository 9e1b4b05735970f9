#pragma once

#include <stdexcept>
#include <string>

namespace cir {

// Malformed arguments: non-finite entries, dimension mismatches, bad parameters.
class InvalidInputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The operation is defined only for a narrower class of shapes (e.g. square systems).
class UnsupportedShapeError : public InvalidInputError {
public:
    using InvalidInputError::InvalidInputError;
};

// The model cannot support the requested reconstruction or tracking task
// (rank(CB) too small, singular steady-state target, ...).
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Ill-conditioned solves, Riccati non-convergence.
class NumericalFailureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cir
