#pragma once

#include <curvbc/analytic_geometry.h>
#include <curvbc/lagrangian.h>
#include <curvbc/variational_engine.h>

#include <cstdint>
#include <string>
#include <vector>

namespace curvbc {

///
/// Boundary condition for a restricted surface Lagrangian, built from its coefficient functions
/// only (the gamma0 / gamma1 channels are dropped, which is exact when their coefficient fields
/// are divergence free):
///     -d gamma_bar/d phi_k + div chi_k + 2H (d gamma_hat/d phi_k - div kappa_k) - 2 kappa_k . grad H
/// Throws ParameterError if `surf` has no restricted form.
///
Eigen::VectorXd reduced_bc_rhs(const SurfaceLagrangian& surf, const BoundaryPointData& data);

struct IsotropicBcValues
{
    /// -2 tau d^C H in an orthonormal tangent frame (the metric-derivative terms vanish there).
    Eigen::Vector2d tangential = Eigen::Vector2d::Zero();
    /// 2 sigma H - 4 tau H^2: the pressure, i.e. the normal condition along the inward normal.
    double normal = 0.0;
};

/// `mean_curvature_gradient` holds d_A H in an orthonormal tangent frame.
IsotropicBcValues isotropic_bc_values(
    const IsotropicSurfaceParams& params, double mean_curvature, const Eigen::Vector2d& mean_curvature_gradient);

/// 2 sigma H (1 - delta H), delta = 2 tau / sigma.
double tolman_pressure(const IsotropicSurfaceParams& params, double mean_curvature);

struct TolmanRow
{
    double radius = 0.0;
    double mean_curvature = 0.0;
    double dp_tolman = 0.0;
    double dp_young_laplace = 0.0;
    double delta_h = 0.0;
};

struct TolmanCurve
{
    IsotropicSurfaceParams params;
    std::vector<TolmanRow> rows;

    /// Header R,H,dp_tolman,dp_young_laplace,delta_H then one row per radius.
    std::string to_csv() const;
};

/// Throws ParameterError for non-positive or unsorted radii.
TolmanCurve tolman_curve(const IsotropicSurfaceParams& params, const std::vector<double>& radii);

///
/// (1 - delta H) (div P0 - p0) - delta P0 . grad H for a rate-independent Gamma_0 (the base density
/// of `surf`), with P0 = dGamma_0/d(grad_s phi) and p0 = dGamma_0/d phi.
///
Eigen::VectorXd extended_bc_rhs(const SurfaceLagrangian& surf, double delta, const BoundaryPointData& data);

/// Copy of `surf` with Gamma_hat replaced by delta Gamma_0 / 2.
SurfaceLagrangian with_proportional_curvature(const SurfaceLagrangian& surf, double delta);

struct ReductionRow
{
    enum class Status { pass, fail, finding };

    std::string name;
    std::string description;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    int samples = 0;
    Status status = Status::pass;
};

std::string to_string(ReductionRow::Status status);

struct ReductionReport
{
    std::vector<ReductionRow> rows;
    /// Frame in which tangential components are compared.
    std::string frame_note;

    /// True when no row failed (findings do not count as failures).
    bool passed() const;
    std::string to_json() const;
    std::string to_text() const;
};

struct ReductionOptions
{
    int samples = 100;
    std::uint64_t seed = 0;
    /// Icosphere level of the discrete droplet row.
    int discrete_level = 3;
};

///
/// Cross-checks of the reduction chain on analytic sphere and torus fixtures (plus one discrete
/// sphere row): general boundary condition versus its restricted, isotropic, normal-projected and
/// proportional-curvature specializations, and the adapted-frame expansion versus the frame-free
/// divergence.
///
ReductionReport verify_reductions(const ReductionOptions& options = {});

///
/// Surface-action pressure on a sphere of radius R: the central difference in u of the isotropic
/// surface action (Gamma_0 - 2H Gamma_hat parts) for the uniform radial displacement phi = u N,
/// divided by the total area. The continuum value is 2 sigma H - 4 tau H^2.
///
double discrete_droplet_pressure(const IsotropicSurfaceParams& params, double radius, int level);

} // namespace curvbc
