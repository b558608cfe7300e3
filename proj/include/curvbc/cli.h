#pragma once

#include <curvbc/lagrangian.h>
#include <curvbc/solver.h>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace curvbc::cli {

struct GeometrySpec
{
    /// sphere, torus or file for mesh-check (default sphere); ball for gradcheck and solve.
    std::string kind;
    double radius = 1.0;
    double minor_radius = 0.5;
    /// Ball surface level (gradcheck 1, solve default_ball_level) or the discrete verify level (3).
    std::optional<int> level;
    /// Inclusive range of refinement levels for mesh-check.
    int level_min = 2;
    int level_max = 5;
    /// Radial ball shells (gradcheck 2, solve default_ball_layers).
    std::optional<int> layers;
    std::string path;
};

struct LagrangianSpec
{
    std::string name;
    std::map<std::string, double> parameters;
};

struct TolmanSpec
{
    double sigma = 1.0;
    double tau = 0.0;
    std::vector<double> radii;
};

struct CheckSpec
{
    int trials = 3;
    double tolerance = 1e-6;
    int samples = 100;
};

///
/// Validated run configuration. JSON schema (every key optional, unknown keys rejected):
///
///     {
///       "command": "mesh-check" | "gradcheck" | "solve" | "tolman" | "verify",
///       "seed": 0,
///       "output_dir": "path",
///       "geometry": {"kind": "sphere" | "torus" | "ball" | "file", "radius": 1.0,
///                    "minor_radius": 0.5, "level": 4, "levels": "2..5", "layers": 16,
///                    "path": "mesh.off"},
///       "bulk": {"name": "harmonic" | "poisson_source" | "linear_elastic",
///                "parameters": {"f": 6.0, "lambda": 1.0, "mu": 1.0}},
///       "surface": {"form": "isotropic" | "robin" | "neumann" | "free" | "restricted",
///                   "parameters": {"sigma": 1.0, "tau": 0.1, "beta": 1.0, "g": 0.5, ...}},
///       "solver": {"tolerance": 1e-10, "max_iterations": 50, "gauge": false},
///       "tolman": {"sigma": 1.0, "tau": 0.05, "radii": "0.2:10:50" | [0.5, 1.0]},
///       "checks": {"trials": 3, "tolerance": 1e-6, "samples": 100}
///     }
///
/// Restricted surfaces take "bar" and "hat" (coefficients of 1/2 |phi|^2 in gamma_bar and
/// gamma_hat) and "chi" and "kappa" (stresses along the rotation field about the z axis).
///
struct RunConfig
{
    std::string command;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> output_dir;
    GeometrySpec geometry;
    LagrangianSpec bulk{"harmonic", {}};
    LagrangianSpec surface{"free", {}};
    SolveOptions solver;
    TolmanSpec tolman;
    CheckSpec checks;

    /// Effective configuration as canonical JSON; its FNV-1a hash goes into output headers.
    std::string canonical_json() const;
    std::uint64_t hash() const;
};

/// Throws ConfigError on schema violations.
RunConfig parse_config(const std::string& json_text);

/// "a:b:n" (n evenly spaced values including both ends) or a comma separated list.
std::vector<double> parse_radii(const std::string& text);
/// "a..b" or a single level.
std::pair<int, int> parse_levels(const std::string& text);

/// Catalog objects for the configured Lagrangians; throws ConfigError for invalid parameters.
BulkLagrangian make_bulk(const LagrangianSpec& spec);
SurfaceLagrangian make_surface(const LagrangianSpec& spec, int components);

///
/// Executes a validated configuration, writing output files and a summary to `log`. Returns 0 when
/// every requested check passes and 1 otherwise; computation errors propagate.
///
int execute(const RunConfig& config, std::ostream& log);

/// Command-line entry point: 0 on success, 1 on a failed check or computation, 2 on a config error.
int run(int argc, char** argv);

} // namespace curvbc::cli
