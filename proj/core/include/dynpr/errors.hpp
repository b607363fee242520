#pragma once

#include <stdexcept>
#include <string>

namespace dynpr {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument values (bad alpha, step size, window, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input data. Carries a line number when one is known (0 otherwise).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Iterative solver failed to reach the requested tolerance.
class ConvergenceError : public Error {
public:
    explicit ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// NaN/Inf or step-size underflow during integration.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what, double t)
        : Error(what), time_(t) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

} // namespace dynpr
