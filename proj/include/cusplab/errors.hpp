#pragma once

#include <stdexcept>
#include <string>

namespace cusplab {

/// Base of everything the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside an operation's domain (bad B0, r <= 0, tau outside a trajectory, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Iteration failed to contract or a limit did not settle.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Adaptive step size collapsed.
class StepFailure : public Error {
public:
    using Error::Error;
};

/// Degenerate or self-intersecting contour, wrong number of circle crossings.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Bad user configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A numerical invariant failed at run time (CLI exit code 3).
class InvariantViolation : public Error {
public:
    InvariantViolation(std::string invariant, const std::string& detail)
        : Error(invariant + ": " + detail), invariant_(std::move(invariant)) {}
    const std::string& invariant() const noexcept { return invariant_; }

private:
    std::string invariant_;
};

} // namespace cusplab
