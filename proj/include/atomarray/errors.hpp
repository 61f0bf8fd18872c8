#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace atomarray {

// Raised for inputs outside an operation's mathematical domain
// (coincident atoms, zero displacement, out-of-range indices).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A resolvent was requested at (or numerically on top of) an undamped pole.
class PoleError : public std::runtime_error {
public:
    PoleError(const std::string& what, std::complex<double> nearest)
        : std::runtime_error(what), nearest_eigenvalue(nearest) {}
    std::complex<double> nearest_eigenvalue;
};

class UnphysicalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ApproximationInvalid : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& msg)
        : std::runtime_error(field.empty() ? msg : field + ": " + msg), field_path(field) {}
    std::string field_path;
};

}  // namespace atomarray
