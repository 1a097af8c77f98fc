#pragma once

// Error taxonomy. Each class maps to one CLI exit code:
//   ParamError, BoundaryError      -> 2 (configuration / validation)
//   DriveError                     -> 3 (drive domain violation)
//   UnstableError, MarginalError   -> 4 (parametric instability)
//   NumericalError, ResolutionError, ExchangeError -> 5 (numerical failure)

#include <stdexcept>
#include <string>

namespace fluxion {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid or inconsistent physical parameters, bad config input.
class ParamError : public Error {
public:
    using Error::Error;
};

// Requested modulation depth outside the synthesizable domain.
class DriveError : public Error {
public:
    using Error::Error;
};

// Operating point inside a parametric resonance tongue.
class UnstableError : public Error {
public:
    UnstableError(const std::string& what, double growth_exponent)
        : Error(what), growth_exponent_(growth_exponent) {}
    // Imaginary part of the characteristic exponent, e-foldings per pi of phase.
    double growth_exponent() const noexcept { return growth_exponent_; }

private:
    double growth_exponent_;
};

// |trace| = 2 exactly: no unique mode decomposition exists.
class MarginalError : public Error {
public:
    using Error::Error;
};

// Integration failure: step underflow, step budget exceeded, divergence.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Requested spectral index beyond the sampling Nyquist limit.
class ResolutionError : public Error {
public:
    using Error::Error;
};

// Energy record has no measurable exchange oscillation.
class ExchangeError : public Error {
public:
    ExchangeError(const std::string& what, double diagnostic)
        : Error(what), diagnostic_(diagnostic) {}
    double diagnostic() const noexcept { return diagnostic_; }

private:
    double diagnostic_;
};

// No stability boundary inside the scanned interval.
class BoundaryError : public Error {
public:
    using Error::Error;
};

} // namespace fluxion
