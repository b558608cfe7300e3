#include <curvbc/tet_mesh.h>

#include <curvbc/errors.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace curvbc {

namespace {

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d)
{
    return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

/// Rotate a triangle so that its smallest index comes first (keeps orientation).
Triangle canonical(Triangle t)
{
    const auto it = std::min_element(t.begin(), t.end());
    std::rotate(t.begin(), it, t.end());
    return t;
}

} // namespace

TetMesh::TetMesh(std::vector<Vec3> vertices, std::vector<Tetrahedron> tets, TriangleMesh boundary,
    std::vector<int> boundary_vertices)
    : m_vertices(std::move(vertices))
    , m_tets(std::move(tets))
    , m_boundary(std::move(boundary))
    , m_boundary_vertices(std::move(boundary_vertices))
{
    const int n = num_vertices();
    if (m_tets.empty()) {
        throw MeshTopologyError("tetrahedral mesh has no elements");
    }
    if (static_cast<int>(m_boundary_vertices.size()) != m_boundary.num_vertices()) {
        throw DimensionError("boundary vertex map does not match the surface vertex count");
    }

    m_surface_index.assign(n, -1);
    for (int i = 0; i < static_cast<int>(m_boundary_vertices.size()); ++i) {
        const int v = m_boundary_vertices[i];
        if (v < 0 || v >= n || m_surface_index[v] != -1) {
            throw MeshTopologyError("boundary vertex map is not injective into the volume vertices");
        }
        if ((m_vertices[v] - m_boundary.position(i)).norm() > 1e-12 * (1.0 + m_vertices[v].norm())) {
            std::ostringstream msg;
            msg << "boundary vertex " << i << " is not at the position of volume vertex " << v;
            throw MeshTopologyError(msg.str());
        }
        m_surface_index[v] = i;
    }

    m_volumes.resize(m_tets.size());
    m_basis_gradients.resize(m_tets.size());
    m_dual_volumes = Eigen::VectorXd::Zero(n);
    std::vector<char> used(n, 0);
    for (int t = 0; t < num_tets(); ++t) {
        const auto& T = m_tets[t];
        for (int v : T) {
            if (v < 0 || v >= n) {
                std::ostringstream msg;
                msg << "tetrahedron " << t << " references vertex " << v << " out of range";
                throw MeshTopologyError(msg.str());
            }
            used[v] = 1;
        }
        const Vec3 &a = m_vertices[T[0]], &b = m_vertices[T[1]], &c = m_vertices[T[2]],
                   &d = m_vertices[T[3]];
        const double vol = signed_volume(a, b, c, d);
        if (!(vol > 0.0)) {
            std::ostringstream msg;
            msg << "tetrahedron " << t << " (" << T[0] << ", " << T[1] << ", " << T[2] << ", " << T[3]
                << ") has non-positive volume " << vol;
            throw MeshQualityError(msg.str());
        }
        m_volumes[t] = vol;
        m_total_volume += vol;

        Eigen::Matrix3d E;
        E.row(0) = (b - a).transpose();
        E.row(1) = (c - a).transpose();
        E.row(2) = (d - a).transpose();
        // E grad(lambda_j) = e_j for the barycentrics j = 1..3.
        const Eigen::Matrix3d inv = E.inverse();
        auto& g = m_basis_gradients[t];
        g[1] = inv.col(0);
        g[2] = inv.col(1);
        g[3] = inv.col(2);
        g[0] = -(g[1] + g[2] + g[3]);
        for (int v : T) {
            m_dual_volumes[v] += 0.25 * vol;
        }
    }
    for (int v = 0; v < n; ++v) {
        if (!used[v]) {
            std::ostringstream msg;
            msg << "vertex " << v << " is not used by any tetrahedron";
            throw MeshTopologyError(msg.str());
        }
    }

    // Faces used once, outward oriented for positive tetrahedra.
    std::map<std::array<int, 3>, std::pair<int, Triangle>> faces;
    for (const auto& T : m_tets) {
        const std::array<Triangle, 4> local{
            Triangle{T[1], T[2], T[3]}, Triangle{T[0], T[3], T[2]}, Triangle{T[0], T[1], T[3]},
            Triangle{T[0], T[2], T[1]}};
        for (const auto& f : local) {
            std::array<int, 3> key = f;
            std::sort(key.begin(), key.end());
            auto& entry = faces[key];
            ++entry.first;
            entry.second = f;
            if (entry.first > 2) {
                throw MeshTopologyError("a triangle is shared by more than two tetrahedra");
            }
        }
    }
    std::vector<Triangle> expected;
    expected.reserve(m_boundary.num_faces());
    for (const auto& f : m_boundary.triangles()) {
        expected.push_back(canonical(
            {m_boundary_vertices[f[0]], m_boundary_vertices[f[1]], m_boundary_vertices[f[2]]}));
    }
    std::vector<Triangle> found;
    for (const auto& [key, entry] : faces) {
        if (entry.first == 1) {
            found.push_back(canonical(entry.second));
        }
    }
    std::sort(expected.begin(), expected.end());
    std::sort(found.begin(), found.end());
    if (found != expected) {
        std::ostringstream msg;
        msg << "boundary of the tetrahedral mesh (" << found.size()
            << " faces) does not match the linked surface (" << expected.size()
            << " faces) with outward orientation";
        throw MeshTopologyError(msg.str());
    }

    m_curvature = compute_curvature(m_boundary);

    // Vertex surface-gradient stencils.
    const int nb = m_boundary.num_vertices();
    m_stencils.resize(nb);
    for (int i = 0; i < nb; ++i) {
        std::map<int, Vec3> acc;
        double area = 0.0;
        for (int f : m_boundary.vertex_faces(i)) {
            const double A = m_boundary.face_area(f);
            area += A;
            for (int c = 0; c < 3; ++c) {
                auto [it, inserted] = acc.try_emplace(m_boundary.triangle(f)[c], Vec3::Zero());
                it->second += A * m_boundary.basis_gradient(f, c);
            }
        }
        const Eigen::Matrix3d P = m_boundary.vertex_projector(i);
        for (const auto& [w, g] : acc) {
            m_stencils[i].push_back({w, P * (g / area)});
        }
    }
}

double TetMesh::min_tet_volume() const
{
    return *std::min_element(m_volumes.begin(), m_volumes.end());
}

SurfacePoint TetMesh::surface_point(int i) const
{
    return {m_boundary.position(i), m_boundary.vertex_normal(i), m_curvature.mean_curvature[i]};
}

TetMesh build_ball_tetmesh(double radius, int surface_level, int radial_layers)
{
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw ParameterError("ball radius must be positive");
    }
    if (radial_layers < 2) {
        throw ParameterError("ball mesh needs at least 2 radial layers");
    }
    TriangleMesh surface = build_icosphere(radius, surface_level);
    const int ns = surface.num_vertices();

    // Shell s = 0 is the surface (radius R), shell s has radius R (layers - s) / layers.
    std::vector<Vec3> vertices;
    vertices.reserve(static_cast<size_t>(ns) * radial_layers + 1);
    for (int s = 0; s < radial_layers; ++s) {
        const double scale = static_cast<double>(radial_layers - s) / radial_layers;
        for (int v = 0; v < ns; ++v) {
            vertices.push_back(s == 0 ? surface.position(v) : Vec3(scale * surface.position(v)));
        }
    }
    const int centre = static_cast<int>(vertices.size());
    vertices.push_back(Vec3::Zero());

    auto id = [ns](int shell, int v) { return shell * ns + v; };
    std::vector<Tetrahedron> tets;
    tets.reserve(static_cast<size_t>(surface.num_faces()) * (3 * (radial_layers - 1) + 1));
    auto add = [&](Tetrahedron T) {
        if (signed_volume(vertices[T[0]], vertices[T[1]], vertices[T[2]], vertices[T[3]]) < 0.0) {
            std::swap(T[2], T[3]);
        }
        tets.push_back(T);
    };
    for (const auto& f : surface.triangles()) {
        std::array<int, 3> s = f;
        std::sort(s.begin(), s.end());
        for (int shell = 0; shell + 1 < radial_layers; ++shell) {
            // t = outer shell, b = inner shell.
            const int t0 = id(shell, s[0]), t1 = id(shell, s[1]), t2 = id(shell, s[2]);
            const int b0 = id(shell + 1, s[0]), b1 = id(shell + 1, s[1]), b2 = id(shell + 1, s[2]);
            add({b0, b1, b2, t2});
            add({b0, b1, t1, t2});
            add({b0, t0, t1, t2});
        }
        const int inner = radial_layers - 1;
        add({centre, id(inner, f[0]), id(inner, f[1]), id(inner, f[2])});
    }

    std::vector<int> boundary_vertices(ns);
    for (int v = 0; v < ns; ++v) {
        boundary_vertices[v] = v;
    }
    return TetMesh(std::move(vertices), std::move(tets), std::move(surface), std::move(boundary_vertices));
}

} // namespace curvbc
