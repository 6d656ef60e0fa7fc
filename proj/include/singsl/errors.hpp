#pragma once

#include <stdexcept>
#include <string>

namespace singsl {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid interval or point outside the domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The weight rho drops below the positivity floor.
class PositivityError : public Error {
public:
    using Error::Error;
};

/// One of the integral surrogates diverges on the validation grid.
class IntegrabilityError : public Error {
public:
    using Error::Error;
};

/// Grid resolution below the allowed minimum, or a malformed grid.
class GridError : public Error {
public:
    using Error::Error;
};

/// Spectral point outside the declared half-plane, or |mu| below the cutoff.
class HalfPlaneError : public Error {
public:
    using Error::Error;
};

/// Picard iteration hit the iteration cap with the increment above tolerance.
class NoConvergenceError : public Error {
public:
    using Error::Error;
};

/// A leading-term exponential under- or overflows double range.
class NormalizationError : public Error {
public:
    using Error::Error;
};

/// Step size collapse in the adaptive reference integrator.
class StiffnessError : public Error {
public:
    using Error::Error;
};

/// Malformed problem-spec file.
class SpecError : public Error {
public:
    using Error::Error;
};

}  // namespace singsl
