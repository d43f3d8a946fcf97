#pragma once

#include <stdexcept>
#include <string>

namespace choquard {

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid domain geometry: unsupported dimension, empty or edge-touching
/// mask, non-positive extent.
struct DomainError : Error {
    using Error::Error;
};

/// An iterative solver exhausted its budget without reaching tolerance.
struct ConvergenceError : Error {
    using Error::Error;
};

/// Operands live on incompatible grids.
struct DimensionError : Error {
    using Error::Error;
};

/// A requested allocation or work volume exceeds the configured cap.
struct ResourceError : Error {
    using Error::Error;
};

/// An input that must be nonzero (or nondegenerate) is not.
struct DegenerateInput : Error {
    using Error::Error;
};

/// The fibering map t -> J(t u) has no interior maximum on the ray.
struct RayUnbounded : Error {
    using Error::Error;
};

/// A scale parameter is not resolvable on the given grid.
struct ResolutionError : Error {
    using Error::Error;
};

/// A least-squares fit is ill-posed (too few points, zero spread).
struct FitError : Error {
    using Error::Error;
};

/// A search over a parameter grid found no admissible value.
struct NotFound : Error {
    using Error::Error;
};

/// A linear system or quadratic form is numerically singular.
struct IllConditioned : Error {
    using Error::Error;
};

/// Malformed configuration input (bad key, unparsable value, bad range).
struct ConfigError : Error {
    using Error::Error;
};

/// An index is out of range for the container it addresses.
struct IndexError : Error {
    using Error::Error;
};

/// File could not be read, written, or parsed as the expected format.
struct IoError : Error {
    using Error::Error;
};

} // namespace choquard
