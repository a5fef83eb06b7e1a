#pragma once

#include <stdexcept>
#include <string>

namespace synclab {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The communication graph violates a standing assumption
/// (leader in-edges, non-symmetric follower subgraph, no spanning tree).
class InvalidTopology : public Error {
public:
    using Error::Error;
};

/// A matrix required to be symmetric positive definite is not.
class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

/// A gain parameter is outside its admissible range (mu, rho, K, Gamma, alpha).
class InvalidGain : public Error {
public:
    using Error::Error;
};

/// A dynamical model fails a construction-time validity check.
class InvalidModel : public Error {
public:
    using Error::Error;
};

/// The inertia matrix is (numerically) singular or indefinite for the given
/// parameters, i.e. the parameter vector is not physical.
class SingularInertia : public Error {
public:
    using Error::Error;
};

/// An integrator stage produced a NaN/Inf derivative.
class NonFiniteDerivative : public Error {
public:
    using Error::Error;
};

/// The integrated state became NaN/Inf; the message carries the first
/// offending time and state component.
class NonFiniteState : public Error {
public:
    using Error::Error;
};

/// A scenario document violates the config schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

class IOError : public Error {
public:
    using Error::Error;
};

/// Not enough samples to evaluate a windowed quantity.
class InsufficientSamples : public Error {
public:
    using Error::Error;
};

}  // namespace synclab
