#pragma once

#include <stdexcept>
#include <string>

namespace revival {

// Base for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed piecewise data, grids, times or configuration.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// A value outside the domain where an operation is defined (e.g. a Pruefer
// phase requested with lambda <= max V).
class DomainError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double x)
        : Error(what + " at x = " + std::to_string(x)), x_(x) {}
    double x() const noexcept { return x_; }

private:
    double x_;
};

// Raised when a root search bracket does not contain a sign change.
class BracketError : public Error {
public:
    BracketError(const std::string& what, int index)
        : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}
    int index() const noexcept { return index_; }

private:
    int index_;
};

class InconsistentEigenvalue : public Error {
public:
    using Error::Error;
};

// Sign-change and phase root counts disagree, or the sampling is too coarse.
class ResolutionError : public Error {
public:
    using Error::Error;
};

class OrderingError : public Error {
public:
    using Error::Error;
};

class FitDegenerate : public Error {
public:
    using Error::Error;
};

class GramCheckError : public Error {
public:
    using Error::Error;
};

}  // namespace revival
