#include <doctest.h>

#include <curvbc/errors.h>
#include <curvbc/tet_mesh.h>

#include "fixtures.h"
#include "oracles.h"

using namespace curvbc;

namespace {

double polyhedron_volume(const TriangleMesh& m)
{
    std::vector<Eigen::Vector3d> x(m.vertices().begin(), m.vertices().end());
    std::vector<std::array<int, 3>> f;
    for (int i = 0; i < m.num_faces(); ++i) f.push_back(m.triangle(i));
    return oracles::enclosed_volume(x, f);
}

std::vector<int> identity(int n)
{
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = i;
    return v;
}

} // namespace

TEST_CASE("ball_volume_matches_enclosed_polyhedron")
{
    const TetMesh coarse = build_ball_tetmesh(1.0, 2, 4);
    CHECK(coarse.boundary().num_faces() == oracles::icosphere_counts(2).faces);
    CHECK(coarse.boundary().num_faces() == 320);
    CHECK(coarse.num_boundary_vertices() == oracles::icosphere_counts(2).vertices);
    // The tets fill the inscribed polyhedron exactly.
    CHECK(coarse.total_volume() == doctest::Approx(polyhedron_volume(coarse.boundary())).epsilon(1e-12));
    CHECK(coarse.total_volume() / oracles::ball_volume(1.0) > 0.96);

    const TetMesh fine = build_ball_tetmesh(1.0, default_ball_level, default_ball_layers);
    CHECK(std::abs(fine.total_volume() / oracles::ball_volume(1.0) - 1.0) <= 0.01);

    const TetMesh big = build_ball_tetmesh(2.0, 2, 4);
    CHECK(big.total_volume() == doctest::Approx(8.0 * coarse.total_volume()).epsilon(1e-12));
}

TEST_CASE("ball_mesh_structure")
{
    const TetMesh mesh = build_ball_tetmesh(1.0, 3, 6);
    CHECK(mesh.min_tet_volume() > 0.0);
    const int ns = mesh.num_boundary_vertices();
    CHECK(mesh.num_vertices() == ns * 6 + 1);
    int boundary = 0;
    for (int v = 0; v < mesh.num_vertices(); ++v) boundary += mesh.is_boundary(v);
    CHECK(boundary == ns);
    for (int i = 0; i < ns; ++i) {
        CHECK(mesh.boundary_vertex(i) == i);
        CHECK(mesh.surface_index(i) == i);
        CHECK(std::abs(mesh.position(i).norm() - 1.0) <= 1e-14);
    }
    CHECK(mesh.dual_volumes().sum() == doctest::Approx(mesh.total_volume()).epsilon(1e-13));
    CHECK(mesh.dual_volumes().minCoeff() > 0.0);

    // Hat-function gradients sum to zero and reproduce linear functions.
    const Vec3 a(0.3, -1.2, 0.8);
    for (int t = 0; t < mesh.num_tets(); t += 97) {
        Vec3 sum = Vec3::Zero(), grad = Vec3::Zero();
        for (int c = 0; c < 4; ++c) {
            sum += mesh.basis_gradient(t, c);
            grad += a.dot(mesh.position(mesh.tet(t)[c])) * mesh.basis_gradient(t, c);
        }
        CHECK(sum.norm() <= 1e-9);
        CHECK((grad - a).norm() <= 1e-9);
    }
}

TEST_CASE("surface_points_and_gradient_stencils")
{
    const TetMesh mesh = build_ball_tetmesh(1.0, 3, 4);
    for (int i = 0; i < mesh.num_boundary_vertices(); i += 37) {
        const SurfacePoint p = mesh.surface_point(i);
        CHECK(p.normal.dot(p.position) > 0.99);
        CHECK(p.mean_curvature == doctest::Approx(1.0).epsilon(0.03));
        // A linear field's stencil gradient is close to its tangential part, and tangent.
        const Vec3 a(0.0, 0.0, 1.0);
        Vec3 g = Vec3::Zero();
        for (const auto& e : mesh.gradient_stencil(i)) g += a.dot(mesh.boundary().position(e.vertex)) * e.weight;
        CHECK(std::abs(g.dot(p.normal)) <= 1e-12);
        CHECK((g - p.tangent_projector() * a).norm() <= 0.05);
    }
}

TEST_CASE("invalid_meshes_are_rejected")
{
    CHECK_THROWS_AS(build_ball_tetmesh(0.0, 2, 4), ParameterError);
    CHECK_THROWS_AS(build_ball_tetmesh(1.0, 2, 1), ParameterError);

    const TriangleMesh tet = fixtures::tetrahedron();
    const std::vector<Vec3> x(tet.vertices().begin(), tet.vertices().end());
    CHECK_NOTHROW(TetMesh(x, {{0, 2, 1, 3}}, tet, identity(4)));
    CHECK_THROWS_AS(TetMesh(x, {{0, 1, 2, 3}}, tet, identity(4)), MeshQualityError);
    CHECK_THROWS_AS(TetMesh(x, {}, tet, identity(4)), MeshTopologyError);
    CHECK_THROWS_AS(TetMesh(x, {{0, 2, 1, 7}}, tet, identity(4)), MeshTopologyError);
    CHECK_THROWS_AS(TetMesh(x, {{0, 2, 1, 3}}, tet, {0, 0, 1, 2}), MeshTopologyError);

    // Two tets sharing a face, but the boundary is only a single tetrahedron: faces do not match.
    std::vector<Vec3> y = x;
    y.push_back(Vec3(3, 3, 3));
    CHECK_THROWS(TetMesh(y, {{0, 2, 1, 3}, {0, 1, 2, 4}}, tet, identity(4)));
}
