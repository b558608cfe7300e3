#include <doctest.h>

#include <curvbc/errors.h>
#include <curvbc/variational_engine.h>

#include "catalog.h"
#include "oracles.h"

#include <functional>

using namespace curvbc;

namespace {

const TetMesh& small_ball()
{
    static const TetMesh mesh = build_ball_tetmesh(1.0, 1, 2);
    return mesh;
}

const TetMesh& medium_ball()
{
    static const TetMesh mesh = build_ball_tetmesh(1.0, 3, 6);
    return mesh;
}

const TetMesh& default_ball()
{
    static const TetMesh mesh = build_ball_tetmesh(1.0, default_ball_level, default_ball_layers);
    return mesh;
}

FieldState nodal(const TetMesh& mesh, int k, const std::function<Eigen::VectorXd(const Vec3&)>& f)
{
    FieldState s = FieldState::zeros(mesh.num_vertices(), k);
    for (int v = 0; v < mesh.num_vertices(); ++v) s.values.row(v) = f(mesh.position(v)).transpose();
    return s;
}

/// L = 1/2 m |dphi/dt|^2.
class KineticDensity final : public BulkDensity
{
public:
    explicit KineticDensity(double m)
        : m_m(m)
    {}
    int components() const override { return 1; }
    DensityPartials evaluate(const Vec3&, const FieldJet& jet) const override
    {
        DensityPartials p = DensityPartials::zero(1);
        p.value = 0.5 * m_m * jet.rate.squaredNorm();
        p.d_rate = m_m * jet.rate;
        return p;
    }
    DensityPartials linearize(const Vec3&, const FieldJet&, const FieldJet& dir) const override
    {
        DensityPartials p = DensityPartials::zero(1);
        p.d_rate = m_m * dir.rate;
        return p;
    }
    bool rate_dependent() const override { return true; }

private:
    double m_m;
};

/// Gamma_0 = 1/2 c |dphi/dt|^2.
class SurfaceKinetic final : public SurfaceDensity
{
public:
    explicit SurfaceKinetic(double c)
        : m_c(c)
    {}
    int components() const override { return 1; }
    DensityPartials evaluate(const SurfacePoint&, const FieldJet& jet) const override
    {
        DensityPartials p = DensityPartials::zero(1);
        p.value = 0.5 * m_c * jet.rate.squaredNorm();
        p.d_rate = m_c * jet.rate;
        return p;
    }
    DensityPartials linearize(const SurfacePoint&, const FieldJet&, const FieldJet& dir) const override
    {
        DensityPartials p = DensityPartials::zero(1);
        p.d_rate = m_c * dir.rate;
        return p;
    }
    Eigen::VectorXd flux_divergence(const SurfacePoint&, const FieldJet&) const override
    {
        return Eigen::VectorXd::Zero(1);
    }
    bool rate_dependent() const override { return true; }

private:
    double m_c;
};

/// Snapshots a t^2 + b at t = -dt, 0, dt.
Trajectory quadratic_trajectory(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double dt)
{
    Trajectory t;
    t.dt = dt;
    t.centre = 1;
    for (int n = -1; n <= 1; ++n) t.snapshots.push_back(a * (n * dt) * (n * dt) + b);
    return t;
}

} // namespace

TEST_CASE("action_examples")
{
    const TetMesh& mesh = medium_ball();
    const ActionBreakdown zero
        = assemble_action(mesh, harmonic_bulk(), make_isotropic_surface(1.0, 0.3, 1), FieldState::zeros(mesh.num_vertices(), 1));
    CHECK(zero.total == 0.0);

    const FieldState x1 = nodal(mesh, 1, [](const Vec3& x) { return Eigen::VectorXd::Constant(1, x.x()); });
    const ActionBreakdown h = assemble_action(mesh, harmonic_bulk(), make_free_surface(), x1);
    CHECK(std::abs(h.bulk / (2.0 * oracles::pi / 3.0) - 1.0) <= 0.02);
    CHECK(h.bulk == doctest::Approx(0.5 * mesh.total_volume()).epsilon(1e-12));

    // phi = u x, so phi = u N on the boundary: the isotropic surface action is 2 sigma u H A = 8 pi sigma u.
    const double u = 0.01, sigma = 1.3;
    const FieldState radial = nodal(mesh, 3, [u](const Vec3& x) { return Eigen::VectorXd(u * x); });
    const ActionBreakdown iso
        = assemble_action(mesh, linear_elastic_bulk(1.0, 1.0), make_isotropic_surface(sigma, 0.0), radial);
    CHECK(std::abs(iso.surface_base / (8.0 * oracles::pi * sigma * u) - 1.0) <= 0.02);
    CHECK(iso.surface_curvature == 0.0);
}

TEST_CASE("action_total_is_sum_of_parts")
{
    for (const auto& pair : catalog::pairs()) {
        const FieldState s = random_state(small_ball().num_vertices(), pair.bulk.components(), 11);
        const ActionBreakdown a = assemble_action(small_ball(), pair.bulk, pair.surface, s);
        CHECK(a.total == doctest::Approx(a.bulk + a.surface_base + a.surface_curvature + a.tangential_divergence));
    }
}

TEST_CASE("gradient_matches_finite_differences_for_all_pairs")
{
    for (const auto& pair : catalog::pairs()) {
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const FieldState s = random_state(small_ball().num_vertices(), pair.bulk.components(), seed);
            worst = std::max(worst, gradient_check(small_ball(), pair.bulk, pair.surface, s).max_relative_deviation);
        }
        INFO(pair.name);
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("hessian_products_match_gradient_differences")
{
    const TetMesh& mesh = small_ball();
    for (const auto& pair : catalog::pairs()) {
        const int k = pair.bulk.components();
        const FieldState s = random_state(mesh.num_vertices(), k, 3, 0.5);
        const Eigen::MatrixXd d = random_state(mesh.num_vertices(), k, 4).values;
        const double h = 1e-6;
        FieldState plus = s, minus = s;
        plus.values += h * d;
        minus.values -= h * d;
        const Eigen::MatrixXd fd = (action_gradient(mesh, pair.bulk, pair.surface, plus)
                                       - action_gradient(mesh, pair.bulk, pair.surface, minus))
            / (2 * h);
        const Eigen::MatrixXd hv = hessian_vector_product(mesh, pair.bulk, pair.surface, s, d);
        INFO(pair.name);
        CHECK((hv - fd).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, hv.cwiseAbs().maxCoeff()));

        const Eigen::SparseMatrix<double> H = action_hessian(mesh, pair.bulk, pair.surface, s);
        Eigen::VectorXd flat(d.size());
        for (int v = 0; v < d.rows(); ++v)
            for (int c = 0; c < k; ++c) flat(v * k + c) = d(v, c);
        const Eigen::VectorXd Hd = H * flat;
        double dev = 0.0;
        for (int v = 0; v < d.rows(); ++v)
            for (int c = 0; c < k; ++c) dev = std::max(dev, std::abs(Hd(v * k + c) - hv(v, c)));
        CHECK(dev <= 1e-10 * std::max(1.0, hv.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("quadratic_gradients_are_affine")
{
    const TetMesh& mesh = small_ball();
    for (const auto& pair : catalog::pairs()) {
        if (!pair.bulk.is_quadratic() || !pair.surface.is_quadratic()) continue;
        const int k = pair.bulk.components();
        const FieldState x = random_state(mesh.num_vertices(), k, 5), y = random_state(mesh.num_vertices(), k, 6);
        FieldState z = FieldState::zeros(mesh.num_vertices(), k), mix = z;
        mix.values = 2.0 * x.values - 0.5 * y.values;
        auto g = [&](const FieldState& s) { return action_gradient(mesh, pair.bulk, pair.surface, s); };
        const Eigen::MatrixXd g0 = g(z);
        const Eigen::MatrixXd expected = 2.0 * (g(x) - g0) - 0.5 * (g(y) - g0);
        INFO(pair.name);
        CHECK(((g(mix) - g0) - expected).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, expected.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("interior_residual_is_gradient_over_dual_volume")
{
    const TetMesh& mesh = small_ball();
    const BulkLagrangian b = poisson_source_bulk(3.0);
    const FieldState s = random_state(mesh.num_vertices(), 1, 8);
    const Eigen::MatrixXd g = action_gradient(mesh, b, make_free_surface(), s);
    const EulerLagrangeResidual r = euler_lagrange_residual(mesh, b, s);
    REQUIRE(r.vertices.size() == static_cast<size_t>(mesh.num_vertices() - mesh.num_boundary_vertices()));
    for (size_t i = 0; i < r.vertices.size(); ++i) {
        const int v = r.vertices[i];
        CHECK_FALSE(mesh.is_boundary(v));
        CHECK(std::abs(r.values(i, 0) - g(v, 0) / mesh.dual_volume(v)) <= 1e-12 * std::max(1.0, std::abs(r.values(i, 0))));
    }
}

TEST_CASE("affine_fields_are_discrete_harmonic")
{
    const TetMesh& mesh = medium_ball();
    const FieldState s = nodal(mesh, 1, [](const Vec3& x) { return Eigen::VectorXd::Constant(1, 0.3 * x.x() - x.y() + 2.0 * x.z() + 1.0); });
    const EulerLagrangeResidual r = euler_lagrange_residual(mesh, harmonic_bulk(), s);
    CHECK(r.max_norm <= 1e-10);
}

TEST_CASE("poisson_interior_residual_converges")
{
    // -|x|^2 satisfies the Poisson equation with f = 6.
    auto rel = [](const TetMesh& mesh) {
        const FieldState s = nodal(mesh, 1, [](const Vec3& x) { return Eigen::VectorXd::Constant(1, -x.squaredNorm()); });
        return euler_lagrange_residual(mesh, poisson_source_bulk(6.0), s).l2_norm / 6.0;
    };
    const double coarse = rel(medium_ball()), fine = rel(default_ball());
    CHECK(fine <= 0.05);
    CHECK(fine < coarse);
}

TEST_CASE("robin_boundary_residual_at_radial_solution")
{
    const oracles::RadialRobin exact{6.0, 1.0, 1.0};
    auto rel = [&](const TetMesh& mesh) {
        const FieldState s = nodal(mesh, 1, [&](const Vec3& x) { return Eigen::VectorXd::Constant(1, exact(x.norm())); });
        const BoundaryResidual r = natural_bc_residual(mesh, poisson_source_bulk(6.0), make_robin_surface(1.0), s);
        return r.l2_norm / std::abs(exact.derivative(1.0));
    };
    const double coarse = rel(medium_ball()), fine = rel(default_ball());
    CHECK(fine <= 0.02);
    CHECK(fine < coarse);
}

TEST_CASE("classical_boundary_conditions_are_recovered")
{
    const TetMesh& mesh = small_ball();
    const FieldState s = random_state(mesh.num_vertices(), 1, 9);
    const double beta = 2.5;
    const BoundaryResidual robin = natural_bc_residual(mesh, harmonic_bulk(), make_robin_surface(beta), s);
    for (int i = 0; i < mesh.num_boundary_vertices(); ++i) {
        const double phi = s.values(mesh.boundary_vertex(i), 0);
        CHECK(robin.rhs(i, 0) == doctest::Approx(-beta * phi).epsilon(1e-14));
        CHECK(robin.base_divergence(i, 0) == 0.0);
        CHECK(robin.curvature_block(i, 0) == 0.0);
        CHECK(robin.values(i, 0) == doctest::Approx(robin.flux(i, 0) + beta * phi).epsilon(1e-14));
    }

    const BoundaryResidual free = natural_bc_residual(mesh, harmonic_bulk(), make_free_surface(), s);
    CHECK(free.rhs.cwiseAbs().maxCoeff() == 0.0);
    CHECK((free.values - free.flux).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXd g = action_gradient(mesh, harmonic_bulk(), make_free_surface(), s);
    const Eigen::VectorXd areas = mesh.boundary().vertex_areas();
    for (int i = 0; i < mesh.num_boundary_vertices(); ++i) {
        CHECK(free.flux(i, 0) == doctest::Approx(g(mesh.boundary_vertex(i), 0) / areas(i)).epsilon(1e-12));
    }
}

TEST_CASE("tangential_divergence_cancels")
{
    const TetMesh& mesh = medium_ball();
    for (const auto& field : {AffineTangentField::constant(Vec3(0.3, -0.5, 1.0)), AffineTangentField::rotation(Vec3::UnitX())}) {
        const SurfaceLagrangian plain = make_robin_surface(1.0);
        const SurfaceLagrangian with = with_tangential_flux(plain, std::make_shared<FieldScaledTangentialFlux>(field, 0));
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const FieldState s = random_state(mesh.num_vertices(), 1, seed);
            const ActionBreakdown a = assemble_action(mesh, harmonic_bulk(), with, s);
            CHECK(std::abs(a.tangential_divergence) <= 1e-10);
            CHECK(std::abs(a.total - assemble_action(mesh, harmonic_bulk(), plain, s).total) <= 1e-10);
            const Eigen::MatrixXd d = action_gradient(mesh, harmonic_bulk(), with, s)
                - action_gradient(mesh, harmonic_bulk(), plain, s);
            CHECK(d.cwiseAbs().maxCoeff() <= 1e-10);
        }
    }
}

TEST_CASE("rate_dependent_densities_use_the_trajectory")
{
    const TetMesh& mesh = small_ball();
    const int n = mesh.num_vertices();
    const double m = 2.0, c = 0.5;
    BulkLagrangian kinetic{"kinetic", {}, std::make_shared<KineticDensity>(m)};
    SurfaceLagrangian surf = make_free_surface();
    surf.base = std::make_shared<SurfaceKinetic>(c);

    const Eigen::MatrixXd a = random_state(n, 1, 1).values, b = random_state(n, 1, 2).values;
    FieldState s{b, quadratic_trajectory(a, b, 0.1)};
    CHECK((s.rates().cwiseAbs().maxCoeff()) <= 1e-13);

    // -d/dt (m phi_dot V) = -2 m a V in the bulk; the surface adds -2 c a A.
    const Eigen::MatrixXd g = action_gradient(mesh, kinetic, surf, s);
    const Eigen::VectorXd areas = mesh.boundary().vertex_areas();
    for (int v = 0; v < n; ++v) {
        double expected = -2.0 * m * a(v, 0) * mesh.dual_volume(v);
        if (mesh.is_boundary(v)) expected -= 2.0 * c * a(v, 0) * areas(mesh.surface_index(v));
        CHECK(g(v, 0) == doctest::Approx(expected).epsilon(1e-9));
    }
    const BoundaryResidual r = natural_bc_residual(mesh, kinetic, surf, s);
    for (int i = 0; i < mesh.num_boundary_vertices(); ++i) {
        CHECK(r.rate_terms(i, 0) == doctest::Approx(2.0 * c * a(mesh.boundary_vertex(i), 0)).epsilon(1e-9));
    }

    // Instantaneous gradient check holds the rates fixed.
    CHECK(gradient_check(mesh, kinetic, make_free_surface(), s).max_relative_deviation <= 1e-6);

    CHECK_THROWS_AS(assemble_action(mesh, kinetic, make_free_surface(), FieldState::zeros(n, 1)), MissingDataError);
    FieldState short_traj = s;
    short_traj.trajectory->snapshots.pop_back();
    CHECK_THROWS_AS(short_traj.validate(n, 1), ParameterError);
    FieldState bad_dt = s;
    bad_dt.trajectory->dt = 0.0;
    CHECK_THROWS_AS(bad_dt.validate(n, 1), ParameterError);
    FieldState bad_shape = s;
    bad_shape.trajectory->snapshots[0] = Eigen::MatrixXd::Zero(n - 1, 1);
    CHECK_THROWS_AS(bad_shape.validate(n, 1), DimensionError);
}

TEST_CASE("shape_mismatches_are_rejected")
{
    const TetMesh& mesh = small_ball();
    CHECK_THROWS_AS(assemble_action(mesh, harmonic_bulk(), make_free_surface(3), FieldState::zeros(mesh.num_vertices(), 1)),
        DimensionError);
    CHECK_THROWS_AS(assemble_action(mesh, harmonic_bulk(), make_free_surface(), FieldState::zeros(mesh.num_vertices() + 1, 1)),
        DimensionError);
    FieldState nan = FieldState::zeros(mesh.num_vertices(), 1);
    nan.values(0, 0) = std::nan("");
    CHECK_THROWS_AS(action_gradient(mesh, harmonic_bulk(), make_free_surface(), nan), ParameterError);
}

TEST_CASE("random_state_is_seeded")
{
    CHECK(random_state(10, 2, 42).values == random_state(10, 2, 42).values);
    CHECK(random_state(10, 2, 42).values != random_state(10, 2, 43).values);
    CHECK(random_state(50, 1, 0, 0.25).values.cwiseAbs().maxCoeff() <= 0.25);
}
