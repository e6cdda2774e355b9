#pragma once

#include <stdexcept>
#include <string>

namespace spl {

// Base of every error thrown by the library. The CLI maps subclasses onto
// exit codes, so new failure classes should derive from one of these.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Field length does not match the grid it is paired with.
class SizingError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// A mass/distance constraint that no admissible potential can satisfy.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

class DegenerateInputError : public Error {
public:
    using Error::Error;
};

// Operation called on an object that lacks the required data.
class StateError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class IterationLimitError : public SolverError {
public:
    IterationLimitError(const std::string& what, int iterations, double last_residual)
        : SolverError(what), iterations_(iterations), last_residual_(last_residual) {}

    int iterations() const { return iterations_; }
    double last_residual() const { return last_residual_; }

private:
    int iterations_;
    double last_residual_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace spl
