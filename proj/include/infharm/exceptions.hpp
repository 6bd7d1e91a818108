#pragma once

#include <stdexcept>
#include <string>

namespace infharm {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Precondition violation on a caller-supplied argument.
class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

// Mesh failed a structural sanity check (degenerate element, broken connectivity).
class MeshCorruptionError : public Error {
public:
    using Error::Error;
};

// Point lies outside the mesh domain beyond tolerance.
class OutOfDomainError : public Error {
public:
    using Error::Error;
};

// A caller-supplied function produced an unusable (non-finite or mis-sized) value.
class EvaluationError : public Error {
public:
    using Error::Error;
};

// Adaptive quadrature could not reach the requested tolerance within budget.
class QuadratureError : public Error {
public:
    using Error::Error;
};

// A solver iterate or assembled quantity contains non-finite entries.
class IterateCorruptionError : public Error {
public:
    using Error::Error;
};

// The linearized system is not positive definite (typically the gradient
// regularization epsilon is too small for the current iterate).
class IndefiniteSystemError : public Error {
public:
    using Error::Error;
};

// File format or filesystem failure in readers and writers.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace infharm
