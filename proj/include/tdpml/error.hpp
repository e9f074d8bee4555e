#pragma once

#include <stdexcept>
#include <string>

namespace tdpml {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid geometry: surface above the truncation height, obstacle touching a
/// boundary, source support leaving the fluid strip, ...
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of a function (x3 above the PML layer, a square
/// root requested on the branch cut, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Linear solver failure (singular factorization, residual not reached).
class SolverError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace tdpml
