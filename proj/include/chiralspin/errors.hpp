#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chiralspin {

/// Invalid argument or violated precondition (bad dimension, unknown material, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The dispersive coupling formula was asked to divide by a zero detuning.
class ResonanceError : public DomainError {
public:
    using DomainError::DomainError;
};

/// The time integrator rejected a step.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Run configuration rejected: bad schema, unknown key, wrong type or value.
class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Output could not be written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace chiralspin
