#pragma once

#include <stdexcept>
#include <string>

namespace curvbc {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Invalid numeric parameter (radius, level, moduli, surface tensions, ...).
class ParameterError : public Error
{
public:
    using Error::Error;
};

/// Degenerate geometry: zero-area triangles, inverted tetrahedra.
class MeshQualityError : public Error
{
public:
    using Error::Error;
};

/// Non-manifold, open or inconsistently oriented meshes.
class MeshTopologyError : public Error
{
public:
    using Error::Error;
};

/// Array shapes that do not agree (field length vs vertex count, k mismatch).
class DimensionError : public Error
{
public:
    using Error::Error;
};

/// Requested quantity needs data the caller did not provide (trajectory, restricted form).
class MissingDataError : public Error
{
public:
    using Error::Error;
};

/// Stationarity system has a null space that was not gauged, or incompatible data.
class SingularProblemError : public Error
{
public:
    using Error::Error;
};

/// Iterative solver gave up. Carries the convergence log.
class ConvergenceError : public Error
{
public:
    ConvergenceError(const std::string& what, std::string log)
        : Error(what)
        , m_log(std::move(log))
    {}

    const std::string& log() const { return m_log; }

private:
    std::string m_log;
};

class IoError : public Error
{
public:
    using Error::Error;
};

/// Run configuration that does not match the schema (unknown keys, wrong types, bad values).
class ConfigError : public Error
{
public:
    using Error::Error;
};

} // namespace curvbc
