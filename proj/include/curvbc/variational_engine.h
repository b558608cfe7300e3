#pragma once

#include <curvbc/lagrangian.h>
#include <curvbc/tet_mesh.h>

#include <Eigen/SparseCore>

#include <cstdint>
#include <optional>
#include <vector>

namespace curvbc {

///
/// Nodal snapshots phi(t_0 + n dt). Rates are central differences (second-order one-sided at the
/// ends); `centre` is the snapshot the accompanying FieldState values stand for.
///
struct Trajectory
{
    std::vector<Eigen::MatrixXd> snapshots;
    double dt = 1.0;
    int centre = 1;

    /// d phi / dt at snapshot n.
    Eigen::MatrixXd rate(int n) const;
};

///
/// Nodal field values (vertex count x k) plus an optional trajectory that supplies time rates.
///
struct FieldState
{
    Eigen::MatrixXd values;
    std::optional<Trajectory> trajectory;

    static FieldState zeros(int num_vertices, int components);

    int components() const { return static_cast<int>(values.cols()); }
    /// Rates at the centre snapshot, zero without a trajectory.
    Eigen::MatrixXd rates() const;
    /// Throws DimensionError or ParameterError if the shapes or the trajectory are inconsistent.
    void validate(int num_vertices, int components) const;
};

struct ActionBreakdown
{
    double bulk = 0.0;                  ///< integral of L dv
    double surface_base = 0.0;          ///< integral of Gamma_0 da
    double surface_curvature = 0.0;     ///< integral of -2H Gamma_hat da
    double tangential_divergence = 0.0; ///< integral of div_s S da (zero on a closed surface)
    double total = 0.0;
};

struct EulerLagrangeResidual
{
    /// Interior volume vertices, in increasing order.
    std::vector<int> vertices;
    /// One row per interior vertex.
    Eigen::MatrixXd values;
    /// Dual-volume weighted RMS and max over rows of the component max-norm.
    double l2_norm = 0.0;
    double max_norm = 0.0;
};

///
/// Natural boundary condition at every boundary vertex, one row per surface vertex:
///     flux = d/dt q0 + div P0 - p0 + 2H (p_hat - d/dt q_hat - div P_hat) - 2 P_hat . grad H
/// with p = dGamma/dphi, q = dGamma/d(dphi/dt), P = dGamma/d(grad_s phi). Each right-hand term is
/// kept separately; `values` = flux - rhs.
///
struct BoundaryResidual
{
    /// Volume vertex of each surface vertex.
    std::vector<int> vertices;
    /// Discrete normal flux dL/d(d_j phi_k) n_j: the bulk gradient entry over the lumped area.
    Eigen::MatrixXd flux;
    Eigen::MatrixXd base_divergence;     ///< div P0
    Eigen::MatrixXd base_value;          ///< p0
    Eigen::MatrixXd curvature_block;     ///< 2H (p_hat - div P_hat)
    Eigen::MatrixXd curvature_gradient;  ///< -2 P_hat . grad H
    Eigen::MatrixXd rate_terms;          ///< d/dt q0 - 2H d/dt q_hat
    Eigen::MatrixXd rhs;
    Eigen::MatrixXd values;
    /// Area-weighted RMS and max over rows of the component max-norm.
    double l2_norm = 0.0;
    double max_norm = 0.0;
};

struct ResidualReport
{
    EulerLagrangeResidual interior;
    BoundaryResidual boundary;
};

///
/// Discrete action. Bulk: piecewise-linear elements, one gradient per tetrahedron and potential
/// terms lumped to the corners (weight V/4). Surface: lumped vertex areas, per-vertex H and the
/// vertex surface gradient stencil; Gamma_hat is weighted by -2H pointwise.
///
ActionBreakdown assemble_action(
    const TetMesh& mesh, const BulkLagrangian& bulk, const SurfaceLagrangian& surf, const FieldState& state);

///
/// Gradient of assemble_action with respect to the nodal values (vertex count x k). With a
/// trajectory, rate-dependent densities add -d/dt of the nodal momenta, differenced in time.
///
Eigen::MatrixXd action_gradient(
    const TetMesh& mesh, const BulkLagrangian& bulk, const SurfaceLagrangian& surf, const FieldState& state);

/// Directional derivative of action_gradient along `direction` (rate terms excluded).
Eigen::MatrixXd hessian_vector_product(const TetMesh& mesh, const BulkLagrangian& bulk,
    const SurfaceLagrangian& surf, const FieldState& state, const Eigen::MatrixXd& direction);

/// Assembled Hessian of the rate-independent action; unknown (v, c) has index v * k + c.
Eigen::SparseMatrix<double> action_hessian(
    const TetMesh& mesh, const BulkLagrangian& bulk, const SurfaceLagrangian& surf, const FieldState& state);

/// Interior gradient entries divided by the dual volumes.
EulerLagrangeResidual euler_lagrange_residual(
    const TetMesh& mesh, const BulkLagrangian& bulk, const FieldState& state);

BoundaryResidual natural_bc_residual(
    const TetMesh& mesh, const BulkLagrangian& bulk, const SurfaceLagrangian& surf, const FieldState& state);

ResidualReport residual_report(
    const TetMesh& mesh, const BulkLagrangian& bulk, const SurfaceLagrangian& surf, const FieldState& state);

/// Geometry and field jet at one boundary point.
struct BoundaryPointData
{
    SurfacePoint point;
    /// Surface gradient of H (ambient, tangent).
    Vec3 mean_curvature_gradient = Vec3::Zero();
    FieldJet jet;
};

///
/// Right-hand side of the natural boundary condition at one point, for a rate-independent surface
/// Lagrangian, with the divergences taken in closed form from the density. Throws MissingDataError
/// for rate-dependent densities.
///
Eigen::VectorXd natural_bc_rhs_at_point(const SurfaceLagrangian& surf, const BoundaryPointData& data);

struct GradientCheckReport
{
    int entries = 0;
    /// ||analytic - fd||_inf / max(||analytic||_inf, tiny).
    double max_relative_deviation = 0.0;
    double step = 0.0;
};

/// Central differences of assemble_action over every nodal value, step 1e-6 times the field scale.
GradientCheckReport gradient_check(
    const TetMesh& mesh, const BulkLagrangian& bulk, const SurfaceLagrangian& surf, const FieldState& state);

/// Uniformly random nodal values in [-amplitude, amplitude] from a seeded generator.
FieldState random_state(int num_vertices, int components, std::uint64_t seed, double amplitude = 1.0);

} // namespace curvbc
