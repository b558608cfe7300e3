#pragma once

#include <curvbc/surface_mesh.h>

#include <array>
#include <vector>

namespace curvbc {

using Tetrahedron = std::array<int, 4>;

///
/// Tetrahedral mesh of a solid whose boundary is a closed TriangleMesh.
///
/// Boundary vertex i of the linked surface is volume vertex boundary_vertex(i). Construction
/// checks that every tetrahedron has positive volume, that the faces used by exactly one
/// tetrahedron are, with outward orientation, exactly the triangles of the surface, and precomputes
/// dual (lumped) volumes, boundary curvature and the surface-gradient stencils.
///
class TetMesh
{
public:
    TetMesh(std::vector<Vec3> vertices, std::vector<Tetrahedron> tets, TriangleMesh boundary,
        std::vector<int> boundary_vertices);

    int num_vertices() const { return static_cast<int>(m_vertices.size()); }
    int num_tets() const { return static_cast<int>(m_tets.size()); }

    const std::vector<Vec3>& vertices() const { return m_vertices; }
    const Vec3& position(int v) const { return m_vertices[v]; }
    const Tetrahedron& tet(int t) const { return m_tets[t]; }
    double tet_volume(int t) const { return m_volumes[t]; }
    double total_volume() const { return m_total_volume; }
    double min_tet_volume() const;
    /// Gradient of the hat function of corner i (constant on the tetrahedron).
    const Vec3& basis_gradient(int t, int corner) const { return m_basis_gradients[t][corner]; }

    /// Sum of V_T / 4 over incident tetrahedra.
    double dual_volume(int v) const { return m_dual_volumes[v]; }
    const Eigen::VectorXd& dual_volumes() const { return m_dual_volumes; }

    const TriangleMesh& boundary() const { return m_boundary; }
    const CurvatureData& boundary_curvature() const { return m_curvature; }
    int num_boundary_vertices() const { return m_boundary.num_vertices(); }
    int boundary_vertex(int i) const { return m_boundary_vertices[i]; }
    const std::vector<int>& boundary_vertices() const { return m_boundary_vertices; }
    /// Surface index of a volume vertex, or -1 for interior vertices.
    int surface_index(int v) const { return m_surface_index[v]; }
    bool is_boundary(int v) const { return m_surface_index[v] >= 0; }

    /// Surface point (position, outward vertex normal, mean curvature) of boundary vertex i.
    SurfacePoint surface_point(int i) const;

    ///
    /// Stencil of the vertex surface gradient D_i = sum_w phi_w g_iw^T: the area-weighted average of
    /// incident face gradients, projected onto the vertex tangent plane. Entries are (surface
    /// vertex w, g_iw).
    ///
    struct StencilEntry
    {
        int vertex;
        Vec3 weight;
    };
    const std::vector<StencilEntry>& gradient_stencil(int i) const { return m_stencils[i]; }

private:
    std::vector<Vec3> m_vertices;
    std::vector<Tetrahedron> m_tets;
    std::vector<double> m_volumes;
    std::vector<std::array<Vec3, 4>> m_basis_gradients;
    Eigen::VectorXd m_dual_volumes;
    double m_total_volume = 0.0;

    TriangleMesh m_boundary;
    CurvatureData m_curvature;
    std::vector<int> m_boundary_vertices;
    std::vector<int> m_surface_index;
    std::vector<std::vector<StencilEntry>> m_stencils;
};

///
/// Ball of the given radius: an icosphere boundary (surface vertices first, ids 0..Vs-1) over
/// `radial_layers` concentric scaled shells. Prisms between shells are split into three
/// tetrahedra by global vertex order so that shared faces conform; the innermost shell is coned
/// to a centre vertex.
///
TetMesh build_ball_tetmesh(double radius, int surface_level, int radial_layers);

/// Default ball refinement: level 4 icosphere over 16 shells.
inline constexpr int default_ball_level = 4;
inline constexpr int default_ball_layers = 16;

} // namespace curvbc
