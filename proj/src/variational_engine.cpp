#include <curvbc/variational_engine.h>

#include <curvbc/errors.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

namespace curvbc {

Eigen::MatrixXd Trajectory::rate(int n) const
{
    const int count = static_cast<int>(snapshots.size());
    if (count < 3) {
        throw MissingDataError("trajectory needs at least 3 snapshots");
    }
    if (n < 0 || n >= count) {
        throw DimensionError("trajectory snapshot index out of range");
    }
    const auto& s = snapshots;
    if (n == 0) {
        return (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * dt);
    }
    if (n == count - 1) {
        return (3.0 * s[n] - 4.0 * s[n - 1] + s[n - 2]) / (2.0 * dt);
    }
    return (s[n + 1] - s[n - 1]) / (2.0 * dt);
}

FieldState FieldState::zeros(int num_vertices, int components)
{
    return {Eigen::MatrixXd::Zero(num_vertices, components), std::nullopt};
}

Eigen::MatrixXd FieldState::rates() const
{
    if (!trajectory) {
        return Eigen::MatrixXd::Zero(values.rows(), values.cols());
    }
    return trajectory->rate(trajectory->centre);
}

void FieldState::validate(int num_vertices, int components) const
{
    if (values.rows() != num_vertices || values.cols() != components) {
        std::ostringstream msg;
        msg << "field state is " << values.rows() << " x " << values.cols() << ", expected "
            << num_vertices << " x " << components;
        throw DimensionError(msg.str());
    }
    if (!values.allFinite()) {
        throw ParameterError("field state contains non-finite values");
    }
    if (trajectory) {
        if (trajectory->snapshots.size() < 3) {
            throw ParameterError("trajectory needs at least 3 snapshots");
        }
        if (!(trajectory->dt > 0.0)) {
            throw ParameterError("trajectory time step must be positive");
        }
        if (trajectory->centre < 0 || trajectory->centre >= static_cast<int>(trajectory->snapshots.size())) {
            throw ParameterError("trajectory centre index out of range");
        }
        for (const auto& s : trajectory->snapshots) {
            if (s.rows() != num_vertices || s.cols() != components) {
                throw DimensionError("trajectory snapshot shape does not match the field state");
            }
        }
    }
}

namespace {

struct Problem
{
    const TetMesh& mesh;
    const BulkLagrangian& bulk;
    const SurfaceLagrangian& surf;
    int k;
};

Problem make_problem(const TetMesh& mesh, const BulkLagrangian& bulk, const SurfaceLagrangian& surf,
    const FieldState& state)
{
    const int k = bulk.components();
    if (surf.components != k || surf.base->components() != k || surf.curvature->components() != k) {
        std::ostringstream msg;
        msg << "bulk Lagrangian has " << k << " components but the surface Lagrangian has "
            << surf.components;
        throw DimensionError(msg.str());
    }
    state.validate(mesh.num_vertices(), k);
    if ((bulk.rate_dependent() || surf.rate_dependent()) && !state.trajectory) {
        throw MissingDataError("rate-dependent Lagrangian needs a state trajectory");
    }
    return {mesh, bulk, surf, k};
}

Eigen::MatrixXd tet_gradient(const TetMesh& mesh, int t, const Eigen::MatrixXd& values)
{
    const auto& T = mesh.tet(t);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(values.cols(), 3);
    for (int j = 0; j < 4; ++j) {
        G += values.row(T[j]).transpose() * mesh.basis_gradient(t, j).transpose();
    }
    return G;
}

FieldJet bulk_jet(const Eigen::MatrixXd& values, const Eigen::MatrixXd& rates, int v, const Eigen::MatrixXd& G)
{
    return {values.row(v).transpose(), rates.row(v).transpose(), G};
}

FieldJet surface_jet(const TetMesh& mesh, int i, const Eigen::MatrixXd& values, const Eigen::MatrixXd& rates)
{
    const int v = mesh.boundary_vertex(i);
    FieldJet jet{values.row(v).transpose(), rates.row(v).transpose(),
        Eigen::MatrixXd::Zero(values.cols(), 3)};
    for (const auto& e : mesh.gradient_stencil(i)) {
        jet.gradient += values.row(mesh.boundary_vertex(e.vertex)).transpose() * e.weight.transpose();
    }
    return jet;
}

/// Partials of Gamma_0 - 2H Gamma_hat.
DensityPartials combined_surface(const SurfaceLagrangian& surf, const SurfacePoint& p, const FieldJet& jet)
{
    DensityPartials base = surf.base->evaluate(p, jet);
    const DensityPartials hat = surf.curvature->evaluate(p, jet);
    const double w = -2.0 * p.mean_curvature;
    base.value += w * hat.value;
    base.d_value += w * hat.d_value;
    base.d_rate += w * hat.d_rate;
    base.d_gradient += w * hat.d_gradient;
    return base;
}

DensityPartials combined_linearization(
    const SurfaceLagrangian& surf, const SurfacePoint& p, const FieldJet& jet, const FieldJet& dir)
{
    DensityPartials base = surf.base->linearize(p, jet, dir);
    const DensityPartials hat = surf.curvature->linearize(p, jet, dir);
    const double w = -2.0 * p.mean_curvature;
    base.d_value += w * hat.d_value;
    base.d_rate += w * hat.d_rate;
    base.d_gradient += w * hat.d_gradient;
    return base;
}

/// Gradient (rates held fixed) of the bulk action; optionally the momenta dA/d(dphi/dt).
void bulk_gradient(const Problem& P, const Eigen::MatrixXd& values, const Eigen::MatrixXd& rates,
    Eigen::MatrixXd* gradient, Eigen::MatrixXd* momentum)
{
    const auto& mesh = P.mesh;
    for (int t = 0; t < mesh.num_tets(); ++t) {
        const auto& T = mesh.tet(t);
        const Eigen::MatrixXd G = tet_gradient(mesh, t, values);
        const double w = 0.25 * mesh.tet_volume(t);
        for (int i = 0; i < 4; ++i) {
            const DensityPartials d
                = P.bulk.density->evaluate(mesh.position(T[i]), bulk_jet(values, rates, T[i], G));
            if (gradient) {
                gradient->row(T[i]) += w * d.d_value.transpose();
                for (int j = 0; j < 4; ++j) {
                    gradient->row(T[j]) += w * (d.d_gradient * mesh.basis_gradient(t, j)).transpose();
                }
            }
            if (momentum) {
                momentum->row(T[i]) += w * d.d_rate.transpose();
            }
        }
    }
}

void surface_gradient_terms(const Problem& P, const Eigen::MatrixXd& values, const Eigen::MatrixXd& rates,
    Eigen::MatrixXd* gradient, Eigen::MatrixXd* momentum)
{
    const auto& mesh = P.mesh;
    for (int i = 0; i < mesh.num_boundary_vertices(); ++i) {
        const SurfacePoint p = mesh.surface_point(i);
        const DensityPartials d = combined_surface(P.surf, p, surface_jet(mesh, i, values, rates));
        const double a = mesh.boundary().vertex_area(i);
        const int v = mesh.boundary_vertex(i);
        if (gradient) {
            gradient->row(v) += a * d.d_value.transpose();
            for (const auto& e : mesh.gradient_stencil(i)) {
                gradient->row(mesh.boundary_vertex(e.vertex)) += a * (d.d_gradient * e.weight).transpose();
            }
        }
        if (momentum) {
            momentum->row(v) += a * d.d_rate.transpose();
        }
    }
}

/// Time derivative at the centre snapshot of a quantity evaluated per snapshot.
Eigen::MatrixXd time_derivative(const Trajectory& traj, const std::function<Eigen::MatrixXd(int)>& f)
{
    const int n = traj.centre;
    const int count = static_cast<int>(traj.snapshots.size());
    if (n == 0) {
        return (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * traj.dt);
    }
    if (n == count - 1) {
        return (3.0 * f(n) - 4.0 * f(n - 1) + f(n - 2)) / (2.0 * traj.dt);
    }
    return (f(n + 1) - f(n - 1)) / (2.0 * traj.dt);
}

double weighted_rms(const Eigen::MatrixXd& rows, const std::vector<double>& weights)
{
    double num = 0.0, den = 0.0;
    for (int r = 0; r < rows.rows(); ++r) {
        num += weights[r] * rows.row(r).squaredNorm();
        den += weights[r];
    }
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

double max_abs(const Eigen::MatrixXd& m)
{
    return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

/// Per-component discrete surface divergence of per-vertex tangent rows.
Eigen::MatrixXd vertex_row_divergence(const TriangleMesh& surface, const std::vector<Eigen::MatrixXd>& rows, int k)
{
    const int n = surface.num_vertices();
    Eigen::MatrixXd out(n, k);
    std::vector<Vec3> field(n);
    for (int c = 0; c < k; ++c) {
        for (int i = 0; i < n; ++i) {
            field[i] = rows[i].row(c).transpose();
        }
        out.col(c) = surface_divergence(surface, vertex_to_face_tangent(surface, field));
    }
    return out;
}

} // namespace

ActionBreakdown assemble_action(
    const TetMesh& mesh, const BulkLagrangian& bulk, const SurfaceLagrangian& surf, const FieldState& state)
{
    make_problem(mesh, bulk, surf, state);
    const Eigen::MatrixXd rates = state.rates();
    const auto& values = state.values;

    ActionBreakdown out;
    for (int t = 0; t < mesh.num_tets(); ++t) {
        const auto& T = mesh.tet(t);
        const Eigen::MatrixXd G = tet_gradient(mesh, t, values);
        double sum = 0.0;
        for (int i = 0; i < 4; ++i) {
            sum += bulk.density->evaluate(mesh.position(T[i]), bulk_jet(values, rates, T[i], G)).value;
        }
        out.bulk += 0.25 * mesh.tet_volume(t) * sum;
    }

    const int nb = mesh.num_boundary_vertices();
    std::vector<Vec3> flux(nb, Vec3::Zero());
    for (int i = 0; i < nb; ++i) {
        const SurfacePoint p = mesh.surface_point(i);
        const FieldJet jet = surface_jet(mesh, i, values, rates);
        const double a = mesh.boundary().vertex_area(i);
        out.surface_base += a * surf.base->evaluate(p, jet).value;
        out.surface_curvature += a * (-2.0 * p.mean_curvature) * surf.curvature->evaluate(p, jet).value;
        if (surf.tangential) {
            flux[i] = surf.tangential->evaluate(p, jet);
        }
    }
    if (surf.tangential) {
        const auto& boundary = mesh.boundary();
        out.tangential_divergence
            = integrate_surface(boundary, surface_divergence(boundary, vertex_to_face_tangent(boundary, flux)));
    }
    out.total = out.bulk + out.surface_base + out.surface_curvature + out.tangential_divergence;
    return out;
}

namespace {

Eigen::MatrixXd instantaneous_gradient(const Problem& P, const Eigen::MatrixXd& values, const Eigen::MatrixXd& rates)
{
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(values.rows(), values.cols());
    bulk_gradient(P, values, rates, &g, nullptr);
    surface_gradient_terms(P, values, rates, &g, nullptr);
    return g;
}

Eigen::MatrixXd momentum_rate(const Problem& P, const Trajectory& traj, bool with_bulk, bool with_surface)
{
    return time_derivative(traj, [&](int n) {
        const Eigen::MatrixXd& s = traj.snapshots[n];
        const Eigen::MatrixXd r = traj.rate(n);
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(s.rows(), s.cols());
        if (with_bulk) bulk_gradient(P, s, r, nullptr, &m);
        if (with_surface) surface_gradient_terms(P, s, r, nullptr, &m);
        return m;
    });
}

} // namespace

Eigen::MatrixXd action_gradient(
    const TetMesh& mesh, const BulkLagrangian& bulk, const SurfaceLagrangian& surf, const FieldState& state)
{
    const Problem P = make_problem(mesh, bulk, surf, state);
    Eigen::MatrixXd g = instantaneous_gradient(P, state.values, state.rates());
    if (state.trajectory && (bulk.rate_dependent() || surf.rate_dependent())) {
        g -= momentum_rate(P, *state.trajectory, bulk.rate_dependent(), surf.rate_dependent());
    }
    return g;
}

Eigen::MatrixXd hessian_vector_product(const TetMesh& mesh, const BulkLagrangian& bulk,
    const SurfaceLagrangian& surf, const FieldState& state, const Eigen::MatrixXd& direction)
{
    const Problem P = make_problem(mesh, bulk, surf, state);
    if (direction.rows() != state.values.rows() || direction.cols() != P.k) {
        throw DimensionError("direction does not match the field state shape");
    }
    const Eigen::MatrixXd rates = state.rates();
    const Eigen::MatrixXd zero_rates = Eigen::MatrixXd::Zero(rates.rows(), rates.cols());
    const auto& values = state.values;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(values.rows(), values.cols());

    for (int t = 0; t < mesh.num_tets(); ++t) {
        const auto& T = mesh.tet(t);
        const Eigen::MatrixXd G = tet_gradient(mesh, t, values);
        const Eigen::MatrixXd dG = tet_gradient(mesh, t, direction);
        const double w = 0.25 * mesh.tet_volume(t);
        for (int i = 0; i < 4; ++i) {
            const DensityPartials d = bulk.density->linearize(mesh.position(T[i]),
                bulk_jet(values, rates, T[i], G), bulk_jet(direction, zero_rates, T[i], dG));
            out.row(T[i]) += w * d.d_value.transpose();
            for (int j = 0; j < 4; ++j) {
                out.row(T[j]) += w * (d.d_gradient * mesh.basis_gradient(t, j)).transpose();
            }
        }
    }
    for (int i = 0; i < mesh.num_boundary_vertices(); ++i) {
        const SurfacePoint p = mesh.surface_point(i);
        const DensityPartials d = combined_linearization(surf, p, surface_jet(mesh, i, values, rates),
            surface_jet(mesh, i, direction, zero_rates));
        const double a = mesh.boundary().vertex_area(i);
        out.row(mesh.boundary_vertex(i)) += a * d.d_value.transpose();
        for (const auto& e : mesh.gradient_stencil(i)) {
            out.row(mesh.boundary_vertex(e.vertex)) += a * (d.d_gradient * e.weight).transpose();
        }
    }
    return out;
}

Eigen::SparseMatrix<double> action_hessian(
    const TetMesh& mesh, const BulkLagrangian& bulk, const SurfaceLagrangian& surf, const FieldState& state)
{
    const Problem P = make_problem(mesh, bulk, surf, state);
    const int k = P.k;
    const Eigen::MatrixXd rates = state.rates();
    const auto& values = state.values;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<size_t>(mesh.num_tets()) * 16 * k * k * 2);

    FieldJet dir = FieldJet::zero(k);
    for (int t = 0; t < mesh.num_tets(); ++t) {
        const auto& T = mesh.tet(t);
        const Eigen::MatrixXd G = tet_gradient(mesh, t, values);
        const double w = 0.25 * mesh.tet_volume(t);
        // Element matrix: rows (m, c), columns (j, l).
        Eigen::MatrixXd element = Eigen::MatrixXd::Zero(4 * k, 4 * k);
        for (int i = 0; i < 4; ++i) {
            const FieldJet jet = bulk_jet(values, rates, T[i], G);
            for (int j = 0; j < 4; ++j) {
                for (int l = 0; l < k; ++l) {
                    dir.value.setZero();
                    if (i == j) dir.value(l) = 1.0;
                    dir.gradient.setZero();
                    dir.gradient.row(l) = mesh.basis_gradient(t, j).transpose();
                    const DensityPartials d = bulk.density->linearize(mesh.position(T[i]), jet, dir);
                    for (int c = 0; c < k; ++c) {
                        element(i * k + c, j * k + l) += w * d.d_value(c);
                    }
                    for (int m = 0; m < 4; ++m) {
                        const Eigen::VectorXd col = d.d_gradient * mesh.basis_gradient(t, m);
                        for (int c = 0; c < k; ++c) {
                            element(m * k + c, j * k + l) += w * col(c);
                        }
                    }
                }
            }
        }
        for (int m = 0; m < 4; ++m) {
            for (int j = 0; j < 4; ++j) {
                for (int c = 0; c < k; ++c) {
                    for (int l = 0; l < k; ++l) {
                        const double x = element(m * k + c, j * k + l);
                        if (x != 0.0) triplets.emplace_back(T[m] * k + c, T[j] * k + l, x);
                    }
                }
            }
        }
    }

    for (int i = 0; i < mesh.num_boundary_vertices(); ++i) {
        const SurfacePoint p = mesh.surface_point(i);
        const FieldJet jet = surface_jet(mesh, i, values, rates);
        const double a = mesh.boundary().vertex_area(i);
        const auto& stencil = mesh.gradient_stencil(i);
        const int vi = mesh.boundary_vertex(i);
        for (const auto& ew : stencil) {
            const int vw = mesh.boundary_vertex(ew.vertex);
            for (int l = 0; l < k; ++l) {
                dir.value.setZero();
                if (ew.vertex == i) dir.value(l) = 1.0;
                dir.gradient.setZero();
                dir.gradient.row(l) = ew.weight.transpose();
                const DensityPartials d = combined_linearization(surf, p, jet, dir);
                for (int c = 0; c < k; ++c) {
                    if (d.d_value(c) != 0.0) triplets.emplace_back(vi * k + c, vw * k + l, a * d.d_value(c));
                }
                for (const auto& eu : stencil) {
                    const Eigen::VectorXd col = d.d_gradient * eu.weight;
                    const int vu = mesh.boundary_vertex(eu.vertex);
                    for (int c = 0; c < k; ++c) {
                        if (col(c) != 0.0) triplets.emplace_back(vu * k + c, vw * k + l, a * col(c));
                    }
                }
            }
        }
    }

    const int n = mesh.num_vertices() * k;
    Eigen::SparseMatrix<double> H(n, n);
    H.setFromTriplets(triplets.begin(), triplets.end());
    return H;
}

EulerLagrangeResidual euler_lagrange_residual(const TetMesh& mesh, const BulkLagrangian& bulk, const FieldState& state)
{
    const SurfaceLagrangian free = make_free_surface(bulk.components());
    const Problem P = make_problem(mesh, bulk, free, state);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(state.values.rows(), state.values.cols());
    bulk_gradient(P, state.values, state.rates(), &g, nullptr);
    if (state.trajectory && bulk.rate_dependent()) {
        g -= momentum_rate(P, *state.trajectory, true, false);
    }

    EulerLagrangeResidual out;
    std::vector<double> weights;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (!mesh.is_boundary(v)) {
            out.vertices.push_back(v);
            weights.push_back(mesh.dual_volume(v));
        }
    }
    out.values.resize(static_cast<Eigen::Index>(out.vertices.size()), P.k);
    for (size_t r = 0; r < out.vertices.size(); ++r) {
        const int v = out.vertices[r];
        out.values.row(static_cast<Eigen::Index>(r)) = g.row(v) / mesh.dual_volume(v);
    }
    out.l2_norm = weighted_rms(out.values, weights);
    out.max_norm = max_abs(out.values);
    return out;
}

BoundaryResidual natural_bc_residual(
    const TetMesh& mesh, const BulkLagrangian& bulk, const SurfaceLagrangian& surf, const FieldState& state)
{
    const Problem P = make_problem(mesh, bulk, surf, state);
    const int k = P.k;
    const int nb = mesh.num_boundary_vertices();
    const auto& boundary = mesh.boundary();
    const auto& curvature = mesh.boundary_curvature();
    const Eigen::MatrixXd rates = state.rates();

    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(state.values.rows(), k);
    bulk_gradient(P, state.values, rates, &g, nullptr);
    if (state.trajectory && bulk.rate_dependent()) {
        g -= momentum_rate(P, *state.trajectory, true, false);
    }

    BoundaryResidual out;
    out.vertices = mesh.boundary_vertices();
    out.flux.resize(nb, k);
    out.base_value.resize(nb, k);
    out.curvature_block.resize(nb, k);
    out.curvature_gradient.resize(nb, k);
    out.rate_terms = Eigen::MatrixXd::Zero(nb, k);

    std::vector<Eigen::MatrixXd> base_rows(nb), hat_rows(nb);
    Eigen::MatrixXd hat_value(nb, k);
    for (int i = 0; i < nb; ++i) {
        const SurfacePoint p = mesh.surface_point(i);
        const FieldJet jet = surface_jet(mesh, i, state.values, rates);
        const DensityPartials base = surf.base->evaluate(p, jet);
        const DensityPartials hat = surf.curvature->evaluate(p, jet);
        out.flux.row(i) = g.row(mesh.boundary_vertex(i)) / boundary.vertex_area(i);
        out.base_value.row(i) = base.d_value.transpose();
        hat_value.row(i) = hat.d_value.transpose();
        base_rows[i] = base.d_gradient;
        hat_rows[i] = hat.d_gradient;
        out.curvature_gradient.row(i) = (-2.0 * hat.d_gradient * curvature.mean_curvature_gradient[i]).transpose();
    }
    out.base_divergence = vertex_row_divergence(boundary, base_rows, k);
    const Eigen::MatrixXd hat_divergence = vertex_row_divergence(boundary, hat_rows, k);
    for (int i = 0; i < nb; ++i) {
        out.curvature_block.row(i)
            = 2.0 * curvature.mean_curvature[i] * (hat_value.row(i) - hat_divergence.row(i));
    }

    if (surf.rate_dependent()) {
        const Trajectory& traj = *state.trajectory;
        out.rate_terms = time_derivative(traj, [&](int n) {
            const Eigen::MatrixXd r = traj.rate(n);
            Eigen::MatrixXd q(nb, k);
            for (int i = 0; i < nb; ++i) {
                const SurfacePoint p = mesh.surface_point(i);
                const FieldJet jet = surface_jet(mesh, i, traj.snapshots[n], r);
                q.row(i) = (surf.base->evaluate(p, jet).d_rate
                               - 2.0 * p.mean_curvature * surf.curvature->evaluate(p, jet).d_rate)
                               .transpose();
            }
            return q;
        });
    }

    out.rhs = out.rate_terms + out.base_divergence - out.base_value + out.curvature_block + out.curvature_gradient;
    out.values = out.flux - out.rhs;
    std::vector<double> weights(nb);
    for (int i = 0; i < nb; ++i) {
        weights[i] = boundary.vertex_area(i);
    }
    out.l2_norm = weighted_rms(out.values, weights);
    out.max_norm = max_abs(out.values);
    return out;
}

ResidualReport residual_report(
    const TetMesh& mesh, const BulkLagrangian& bulk, const SurfaceLagrangian& surf, const FieldState& state)
{
    return {euler_lagrange_residual(mesh, bulk, state), natural_bc_residual(mesh, bulk, surf, state)};
}

Eigen::VectorXd natural_bc_rhs_at_point(const SurfaceLagrangian& surf, const BoundaryPointData& data)
{
    if (surf.rate_dependent()) {
        throw MissingDataError("pointwise boundary condition needs rate-independent surface densities");
    }
    const auto& p = data.point;
    const DensityPartials base = surf.base->evaluate(p, data.jet);
    const DensityPartials hat = surf.curvature->evaluate(p, data.jet);
    const Eigen::VectorXd base_div = surf.base->flux_divergence(p, data.jet);
    const Eigen::VectorXd hat_div = surf.curvature->flux_divergence(p, data.jet);
    return base_div - base.d_value + 2.0 * p.mean_curvature * (hat.d_value - hat_div)
        - 2.0 * hat.d_gradient * data.mean_curvature_gradient;
}

GradientCheckReport gradient_check(
    const TetMesh& mesh, const BulkLagrangian& bulk, const SurfaceLagrangian& surf, const FieldState& state)
{
    const Problem P = make_problem(mesh, bulk, surf, state);
    const Eigen::MatrixXd analytic = instantaneous_gradient(P, state.values, state.rates());

    GradientCheckReport report;
    const double scale = std::max(1.0, max_abs(state.values));
    report.step = 1e-6 * scale;
    FieldState probe = state;
    Eigen::MatrixXd fd(analytic.rows(), analytic.cols());
    for (int v = 0; v < analytic.rows(); ++v) {
        for (int c = 0; c < analytic.cols(); ++c) {
            const double x = state.values(v, c);
            probe.values(v, c) = x + report.step;
            const double plus = assemble_action(mesh, bulk, surf, probe).total;
            probe.values(v, c) = x - report.step;
            const double minus = assemble_action(mesh, bulk, surf, probe).total;
            probe.values(v, c) = x;
            fd(v, c) = (plus - minus) / (2.0 * report.step);
        }
    }
    report.entries = static_cast<int>(analytic.size());
    report.max_relative_deviation
        = max_abs(analytic - fd) / std::max(max_abs(analytic), std::numeric_limits<double>::min());
    return report;
}

FieldState random_state(int num_vertices, int components, std::uint64_t seed, double amplitude)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    FieldState s = FieldState::zeros(num_vertices, components);
    for (int v = 0; v < num_vertices; ++v) {
        for (int c = 0; c < components; ++c) {
            s.values(v, c) = u(rng);
        }
    }
    return s;
}

} // namespace curvbc
