#include <doctest.h>

#include <curvbc/analytic_geometry.h>
#include <curvbc/errors.h>
#include <curvbc/surface_mesh.h>

#include "fixtures.h"
#include "oracles.h"

#include <random>

using namespace curvbc;

namespace {

Eigen::VectorXd random_vector(int n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = u(rng);
    return v;
}

FaceTangentField random_face_field(const TriangleMesh& mesh, std::mt19937_64& rng)
{
    FaceTangentField field(mesh.num_faces());
    for (int f = 0; f < mesh.num_faces(); ++f) {
        field[f] = mesh.face_projector(f) * Vec3(random_vector(3, rng));
    }
    return field;
}

double max_h_error(int level, double radius)
{
    const TriangleMesh mesh = build_icosphere(radius, level);
    const Eigen::VectorXd H = compute_mean_curvature(mesh);
    return (H.array() * radius - 1.0).abs().maxCoeff();
}

} // namespace

TEST_CASE("icosphere_counts_follow_subdivision_recurrence")
{
    for (int level = 0; level <= 4; ++level) {
        const TriangleMesh mesh = build_icosphere(1.0, level);
        const auto c = oracles::icosphere_counts(level);
        CHECK(mesh.num_vertices() == c.vertices);
        CHECK(mesh.num_edges() == c.edges);
        CHECK(mesh.num_faces() == c.faces);
        CHECK(mesh.euler_characteristic() == 2);
    }
    CHECK(build_icosphere(1.0, 0).num_vertices() == 12);
    CHECK(build_icosphere(1.0, 2).num_faces() == 320);
}

TEST_CASE("icosphere_rejects_bad_parameters")
{
    CHECK_THROWS_AS(build_icosphere(1.0, 8), ParameterError);
    CHECK_THROWS_AS(build_icosphere(1.0, -1), ParameterError);
    CHECK_THROWS_AS(build_icosphere(0.0, 2), ParameterError);
}

TEST_CASE("icosphere_vertices_lie_on_sphere_and_area_converges")
{
    const TriangleMesh mesh = build_icosphere(2.0, 3);
    for (const auto& x : mesh.vertices()) CHECK(std::abs(x.norm() - 2.0) <= 1e-12);
    CHECK(std::abs(mesh.total_area() / oracles::sphere_area(2.0) - 1.0) <= 0.005);
}

TEST_CASE("lumped_areas_sum_to_total_and_normals_are_unit")
{
    for (const auto& mesh : {build_icosphere(1.3, 3), fixtures::cube(3), fixtures::tetrahedron()}) {
        CHECK(std::abs(mesh.vertex_areas().sum() - mesh.total_area()) <= 1e-12 * mesh.total_area());
        for (int v = 0; v < mesh.num_vertices(); ++v) {
            CHECK(std::abs(mesh.vertex_normal(v).norm() - 1.0) <= 1e-12);
            CHECK(mesh.vertex_area(v) > 0.0);
        }
        for (int f = 0; f < mesh.num_faces(); ++f) CHECK(mesh.face_area(f) > 0.0);
        CHECK(oracles::enclosed_volume(mesh.vertices(), mesh.triangles()) > 0.0);
    }
}

TEST_CASE("sphere_normals_point_outward")
{
    const TriangleMesh mesh = build_icosphere(1.0, 2);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        CHECK(mesh.vertex_normal(v).dot(mesh.position(v)) > 0.99);
    }
}

TEST_CASE("mean_curvature_on_spheres")
{
    const Eigen::VectorXd H1 = compute_mean_curvature(build_icosphere(1.0, 3));
    CHECK((H1.array() - 1.0).abs().maxCoeff() <= 0.02);
    const Eigen::VectorXd H2 = compute_mean_curvature(build_icosphere(2.0, 3));
    CHECK((H2.array() - 0.5).abs().maxCoeff() <= 0.01);
}

TEST_CASE("mean_curvature_on_torus_outer_equator")
{
    const SampledSurface s = sample_mesh(AnalyticSurface::torus(2.0, 0.5), 48, 24);
    const Eigen::VectorXd H = compute_mean_curvature(s.mesh);
    const double exact = oracles::torus_mean_curvature(2.0, 0.5, 0.0);
    CHECK(exact == doctest::Approx(1.2));
    int count = 0;
    for (int v = 0; v < s.mesh.num_vertices(); ++v) {
        if (std::abs(s.parameters[v](1)) < 1e-12) {
            CHECK(std::abs(H(v) / exact - 1.0) <= 0.03);
            ++count;
        }
    }
    CHECK(count == 48);
}

TEST_CASE("flipping_orientation_negates_mean_curvature")
{
    const TriangleMesh mesh = build_icosphere(1.0, 2);
    const Eigen::VectorXd H = compute_mean_curvature(mesh);
    const Eigen::VectorXd Hf = compute_mean_curvature(mesh.flipped());
    CHECK((H + Hf).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK(mesh.flipped().vertex_normal(0).dot(mesh.vertex_normal(0)) == doctest::Approx(-1.0));
}

TEST_CASE("sphere_curvature_converges_monotonically")
{
    double prev_h = 1.0, prev_id = 1.0;
    for (int level = 2; level <= 5; ++level) {
        const double h = max_h_error(level, 1.0);
        const double id = curvature_identity_residual(build_icosphere(1.0, level));
        CHECK((h <= prev_h || h <= 1e-12));
        CHECK(id < prev_id);
        prev_h = h;
        prev_id = id;
    }
    CHECK(max_h_error(4, 1.0) <= 0.02);
}

TEST_CASE("shape_operator_on_sphere")
{
    const TriangleMesh mesh = build_icosphere(1.5, 4);
    const CurvatureData c = compute_curvature(mesh);
    CHECK(c.flagged_vertices.empty());
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const auto& S = c.shape_operators[v];
        CHECK(std::abs(S.matrix.trace() - 2.0 * c.mean_curvature(v)) <= 1e-10);
        CHECK((S.matrix - S.matrix.transpose()).norm() <= 1e-12);
        const Eigen::Vector2d k = S.principal_curvatures();
        CHECK(std::abs(k(0) * 1.5 - 1.0) <= 0.02);
        CHECK(std::abs(k(1) * 1.5 - 1.0) <= 0.02);
        CHECK(c.mean_curvature_gradient[v].norm() <= 1e-2 / (1.5 * 1.5));
        CHECK(std::abs(c.mean_curvature_gradient[v].dot(mesh.vertex_normal(v))) <= 1e-12);
    }
}

TEST_CASE("shape_operator_on_cylinder_away_from_caps")
{
    const SampledSurface s = sample_mesh(AnalyticSurface::cylinder(1.0, 4.0), 64, 32);
    const CurvatureData c = compute_curvature(s.mesh);
    int count = 0;
    for (int v = 0; v < s.mesh.num_vertices(); ++v) {
        if (!s.jets[v] || s.parameters[v](1) < 1.0 || s.parameters[v](1) > 3.0) continue;
        const Eigen::Vector2d k = c.shape_operators[v].principal_curvatures();
        CHECK(std::abs(k(0)) <= 0.02);
        CHECK(std::abs(k(1) - 1.0) <= 0.02);
        CHECK(std::abs(c.mean_curvature(v) - 0.5) <= 0.015);
        CHECK(std::abs(c.shape_operators[v].matrix.trace() - 2.0 * c.mean_curvature(v)) <= 1e-10);
        ++count;
    }
    CHECK(count > 100);
}

TEST_CASE("surface_gradient_examples")
{
    const TriangleMesh sphere = build_icosphere(1.0, 4);
    const auto zero = surface_gradient(sphere, Eigen::VectorXd::Constant(sphere.num_vertices(), 3.0));
    for (const auto& g : zero) CHECK(g.norm() <= 1e-12);

    Eigen::VectorXd z(sphere.num_vertices());
    for (int v = 0; v < sphere.num_vertices(); ++v) z(v) = sphere.position(v).z();
    const auto gz = surface_gradient(sphere, z);
    for (int f = 0; f < sphere.num_faces(); ++f) {
        const auto& t = sphere.triangle(f);
        const Vec3 c = (sphere.position(t[0]) + sphere.position(t[1]) + sphere.position(t[2])).normalized();
        const Vec3 expected = Vec3::UnitZ() - c.z() * c;
        CHECK((gz[f] - expected).norm() <= 0.03);
        CHECK(std::abs(gz[f].norm() - std::sqrt(1.0 - c.z() * c.z())) <= 0.03);
        CHECK(std::abs(gz[f].dot(sphere.face_normal(f))) <= 1e-12 * std::max(1.0, gz[f].norm()));
    }

    const TriangleMesh cube = fixtures::cube(4);
    Eigen::VectorXd x(cube.num_vertices());
    for (int v = 0; v < cube.num_vertices(); ++v) x(v) = cube.position(v).x();
    const auto gx = surface_gradient(cube, x);
    int flat = 0;
    for (int f = 0; f < cube.num_faces(); ++f) {
        if (std::abs(cube.face_normal(f).z() - 1.0) < 1e-12) {
            CHECK((gx[f] - Vec3::UnitX()).norm() <= 1e-12);
            ++flat;
        }
    }
    CHECK(flat == 32);
}

TEST_CASE("divergence_is_negative_adjoint_of_gradient")
{
    std::mt19937_64 rng(0);
    for (const auto& mesh : {build_icosphere(1.0, 3), fixtures::cube(3)}) {
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::VectorXd f = random_vector(mesh.num_vertices(), rng);
            const FaceTangentField V = random_face_field(mesh, rng);
            const Eigen::VectorXd div = surface_divergence(mesh, V);
            const auto grad = surface_gradient(mesh, f);
            double lhs = 0.0, rhs = 0.0, scale = 0.0;
            for (int v = 0; v < mesh.num_vertices(); ++v) {
                lhs += mesh.vertex_area(v) * f(v) * div(v);
                scale += std::abs(mesh.vertex_area(v) * f(v) * div(v));
            }
            for (int F = 0; F < mesh.num_faces(); ++F) rhs -= mesh.face_area(F) * grad[F].dot(V[F]);
            CHECK(std::abs(lhs - rhs) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("discrete_divergence_theorem_is_exact")
{
    std::mt19937_64 rng(1);
    for (const auto& mesh : {build_icosphere(2.0, 3), fixtures::cube(2), fixtures::tetrahedron()}) {
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::VectorXd div = surface_divergence(mesh, random_face_field(mesh, rng));
            const double total = integrate_surface(mesh, div);
            const double scale = integrate_surface(mesh, div.cwiseAbs());
            CHECK(std::abs(total) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("divergence_of_projected_constant_field_on_sphere")
{
    const TriangleMesh mesh = build_icosphere(1.0, 5);
    std::vector<Vec3> ez(mesh.num_vertices(), Vec3::UnitZ());
    const Eigen::VectorXd div = surface_divergence(mesh, vertex_to_face_tangent(mesh, ez));
    double err = 0.0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        err = std::max(err, std::abs(div(v) + 2.0 * mesh.position(v).z()));
    }
    CHECK(err <= 0.05);
}

TEST_CASE("vertex_to_face_tangent_is_tangent")
{
    const TriangleMesh mesh = build_icosphere(1.0, 2);
    std::vector<Vec3> values;
    for (const auto& x : mesh.vertices()) values.push_back(Vec3(x.y(), 2.0, -x.x()));
    const auto field = vertex_to_face_tangent(mesh, values);
    for (int f = 0; f < mesh.num_faces(); ++f) {
        CHECK(std::abs(field[f].dot(mesh.face_normal(f))) <= 1e-12 * std::max(1.0, field[f].norm()));
    }
}

TEST_CASE("curvature_identity_residual_examples")
{
    const double r3 = curvature_identity_residual(build_icosphere(1.0, 3));
    const double r5 = curvature_identity_residual(build_icosphere(1.0, 5));
    CHECK(r3 <= 0.1);
    CHECK(r5 < r3);

    const TriangleMesh cube = fixtures::cube(4);
    const Eigen::VectorXd res = curvature_identity_residuals(cube);
    for (int v = 0; v < cube.num_vertices(); ++v) {
        const Vec3& x = cube.position(v);
        const int on_edges = (std::abs(std::abs(x.x()) - 1) < 1e-12) + (std::abs(std::abs(x.y()) - 1) < 1e-12)
            + (std::abs(std::abs(x.z()) - 1) < 1e-12);
        if (on_edges == 1) CHECK(res(v) <= 1e-12);
    }
}

TEST_CASE("surface_integrals")
{
    const TriangleMesh s2 = build_icosphere(2.0, 3);
    CHECK(std::abs(integrate_surface(s2, Eigen::VectorXd::Ones(s2.num_vertices())) / (16 * oracles::pi) - 1) <= 0.005);

    const TriangleMesh s1 = build_icosphere(1.0, 3);
    CHECK(std::abs(integrate_surface(s1, compute_mean_curvature(s1)) / (4 * oracles::pi) - 1) <= 0.01);
    Eigen::VectorXd z2(s1.num_vertices());
    for (int v = 0; v < s1.num_vertices(); ++v) z2(v) = std::pow(s1.position(v).z(), 2);
    CHECK(std::abs(integrate_surface(s1, z2) / (4 * oracles::pi / 3) - 1) <= 0.01);
    CHECK_THROWS_AS(integrate_surface(s1, Eigen::VectorXd::Ones(3)), DimensionError);
}

TEST_CASE("invalid_meshes_are_rejected")
{
    using V = std::vector<Vec3>;
    const V quad{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    // Open surface: three faces of a tetrahedron.
    CHECK_THROWS_AS(TriangleMesh(quad, {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}}), MeshTopologyError);
    // One face wound the wrong way.
    CHECK_THROWS_AS(TriangleMesh(quad, {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 3, 2}}), MeshTopologyError);
    // Degenerate: a vertex collapsed onto another.
    const V flat{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 0, 0)};
    CHECK_THROWS_AS(TriangleMesh(flat, {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}}), MeshQualityError);
    CHECK_THROWS_AS(TriangleMesh(quad, {{0, 2, 1}, {0, 1, 7}, {0, 3, 2}, {1, 2, 3}}), MeshTopologyError);
    CHECK_NOTHROW(TriangleMesh(quad, {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}}));
}
