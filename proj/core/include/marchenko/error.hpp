#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace marchenko {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments or an inconsistent configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A point fell outside the master grid or between its nodes.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Spectral evolution would amplify a retained mode beyond e^700.
class GrowthError : public Error {
public:
    GrowthError(const std::string& what, double max_exponent)
        : Error(what), max_exponent_(max_exponent) {}

    double max_exponent() const noexcept { return max_exponent_; }

private:
    double max_exponent_;
};

/// The regularised determinant of id+Q is below the patch threshold: the
/// canonical coordinate patch is a poor representative at this (x, t).
class PatchError : public Error {
public:
    PatchError(const std::string& what, std::complex<double> det2, double x, double t)
        : Error(what), det2_(det2), x_(x), t_(t) {}

    std::complex<double> det2() const noexcept { return det2_; }
    double x() const noexcept { return x_; }
    double t() const noexcept { return t_; }

private:
    std::complex<double> det2_;
    double x_;
    double t_;
};

} // namespace marchenko
