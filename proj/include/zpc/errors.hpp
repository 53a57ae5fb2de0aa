#pragma once

#include <stdexcept>
#include <string>

namespace zpc {

/// Invalid physical input (negative occupation, efficiency outside [0,1], ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

/// Truncated Fock ladder holds too much population near its upper edge.
class TruncationError : public std::runtime_error {
public:
    explicit TruncationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A measurement outcome with (numerically) vanishing probability or rate.
class ZeroRateError : public std::runtime_error {
public:
    explicit ZeroRateError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Moments ran away (parametric amplification past the stability boundary).
class InstabilityError : public std::runtime_error {
public:
    explicit InstabilityError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Parameter set for which the requested quantity does not exist; a special
/// case of instability (the dynamics diverge for such parameters).
class InvalidRegimeError : public InstabilityError {
public:
    explicit InvalidRegimeError(const std::string& msg) : InstabilityError(msg) {}
};

/// Iterative solver exhausted its budget.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Integrator step-size or accuracy bound violated.
class StepSizeError : public std::runtime_error {
public:
    explicit StepSizeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Root finder found no sign change on the search bracket.
class NoRootError : public std::runtime_error {
public:
    explicit NoRootError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed config or scenario file; message carries the line number.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace zpc
