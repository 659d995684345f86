#ifndef FERMI_ERRORS_HPP
#define FERMI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fermi {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter violates its documented domain.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// The spatial grid cannot hold the requested initial state.
class GridTooSmall : public InvalidParameter {
public:
    using InvalidParameter::InvalidParameter;
};

/// Configuration text could not be parsed or validated.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// A trajectory produced a non-finite state.
class IntegrationDiverged : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

/// Too many wall impacts inside one step (grazing incidence).
class ChatteringError : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

/// Probability reached the grid edge in reflecting mode.
class LeakageAbort : public Error {
public:
    using Error::Error;
};

}  // namespace fermi

#endif  // FERMI_ERRORS_HPP
