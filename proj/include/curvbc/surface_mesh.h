#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <span>
#include <vector>

namespace curvbc {

using Vec3 = Eigen::Vector3d;
using Triangle = std::array<int, 3>;

/// Geometry needed to evaluate a surface density at one point of the boundary.
struct SurfacePoint
{
    Vec3 position = Vec3::Zero();
    /// Outward unit normal.
    Vec3 normal = Vec3::UnitZ();
    /// Mean curvature, +1/R on a sphere.
    double mean_curvature = 0.0;

    Eigen::Matrix3d tangent_projector() const
    {
        return Eigen::Matrix3d::Identity() - normal * normal.transpose();
    }
};

/// One scalar per vertex.
using VertexScalarField = Eigen::VectorXd;
/// One k-component value per vertex (rows are vertices).
using VertexVectorField = Eigen::MatrixXd;
/// One 3D vector per face, tangent to that face.
using FaceTangentField = std::vector<Vec3>;

///
/// Closed, consistently oriented triangle mesh with precomputed measures.
///
/// Construction validates the mesh: every edge is shared by exactly two triangles traversing it in
/// opposite directions, every vertex is referenced, and no face is degenerate (area below 1e-12
/// times the mean face area). The object is immutable afterwards.
///
/// Lumped vertex areas use the mixed Voronoi scheme, so they sum to the total area. Vertex normals
/// use Max's corner weights (exact for vertices sampled from a sphere); with counter-clockwise
/// winding seen from outside they point outward.
///
class TriangleMesh
{
public:
    TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

    int num_vertices() const { return static_cast<int>(m_vertices.size()); }
    int num_faces() const { return static_cast<int>(m_triangles.size()); }
    int num_edges() const { return m_num_edges; }

    const std::vector<Vec3>& vertices() const { return m_vertices; }
    const std::vector<Triangle>& triangles() const { return m_triangles; }
    const Vec3& position(int v) const { return m_vertices[v]; }
    const Triangle& triangle(int f) const { return m_triangles[f]; }

    double face_area(int f) const { return m_face_areas[f]; }
    const Vec3& face_normal(int f) const { return m_face_normals[f]; }
    double vertex_area(int v) const { return m_vertex_areas[v]; }
    const Eigen::VectorXd& vertex_areas() const { return m_vertex_areas; }
    const Vec3& vertex_normal(int v) const { return m_vertex_normals[v]; }
    double total_area() const { return m_total_area; }
    double mean_edge_length() const { return m_mean_edge_length; }

    /// Gradient of the hat function of the i-th corner of face f (constant on the face).
    const Vec3& basis_gradient(int f, int corner) const { return m_basis_gradients[f][corner]; }

    /// Faces incident to v.
    std::span<const int> vertex_faces(int v) const;
    /// Vertices sharing an edge with v, sorted.
    std::span<const int> vertex_neighbors(int v) const;

    /// Tangent-plane projector I - n n^T at vertex v.
    Eigen::Matrix3d vertex_projector(int v) const;
    /// Tangent-plane projector of face f.
    Eigen::Matrix3d face_projector(int f) const;

    /// Same geometry with every triangle's winding reversed.
    TriangleMesh flipped() const;

    /// V - E + F.
    int euler_characteristic() const { return num_vertices() - num_edges() + num_faces(); }

private:
    std::vector<Vec3> m_vertices;
    std::vector<Triangle> m_triangles;
    int m_num_edges = 0;

    std::vector<double> m_face_areas;
    std::vector<Vec3> m_face_normals;
    std::vector<std::array<Vec3, 3>> m_basis_gradients;
    Eigen::VectorXd m_vertex_areas;
    std::vector<Vec3> m_vertex_normals;
    double m_total_area = 0.0;
    double m_mean_edge_length = 0.0;

    std::vector<int> m_vf_offsets, m_vf_indices;
    std::vector<int> m_vv_offsets, m_vv_indices;
};

/// Per-vertex shape operator in a local orthonormal tangent frame (t1, t2).
struct ShapeOperator
{
    Vec3 t1 = Vec3::UnitX();
    Vec3 t2 = Vec3::UnitY();
    Eigen::Matrix2d matrix = Eigen::Matrix2d::Zero();

    /// Ascending principal curvatures.
    Eigen::Vector2d principal_curvatures() const;
    /// The operator embedded in 3D: sum_ij S_ij t_i t_j^T.
    Eigen::Matrix3d ambient() const;
};

struct CurvatureData
{
    /// Mean curvature per vertex; +1/R on a sphere with outward normals.
    VertexScalarField mean_curvature;
    /// Symmetric shape operator per vertex, trace equal to 2H.
    std::vector<ShapeOperator> shape_operators;
    /// Surface gradient of H, averaged to vertices and tangent to the vertex normal.
    std::vector<Vec3> mean_curvature_gradient;
    /// Vertices whose 1-ring fit was rank deficient; their shape operator is H * identity.
    std::vector<int> flagged_vertices;
};

/// Icosahedron subdivided `level` times (each triangle split into four) and projected to the sphere.
TriangleMesh build_icosphere(double radius, int level);

/// Cotangent-Laplacian mean curvature, H = (Delta x . n) / (-2), with mixed Voronoi areas.
VertexScalarField compute_mean_curvature(const TriangleMesh& mesh);

/// Mean curvature, 1-ring least-squares shape operators and the surface gradient of H.
CurvatureData compute_curvature(const TriangleMesh& mesh);

/// Per-face gradient of the piecewise-linear interpolant of f.
FaceTangentField surface_gradient(const TriangleMesh& mesh, const VertexScalarField& f);

///
/// Negative adjoint of surface_gradient with respect to the lumped-vertex and face-area inner
/// products:
///
///     sum_v a_v f_v (div V)_v = - sum_F A_F (grad f)_F . V_F
///
/// The discrete divergence theorem sum_v a_v (div V)_v = 0 holds identically.
///
VertexScalarField surface_divergence(const TriangleMesh& mesh, const FaceTangentField& field);

/// Face field from per-vertex 3D vectors: the corner average projected onto each face plane.
FaceTangentField vertex_to_face_tangent(const TriangleMesh& mesh, std::span<const Vec3> values);

/// Per-vertex surface divergence of the per-face normal field. The field is constant on faces, so
/// its divergence is the flux jump |e| theta_e across every edge (theta_e the signed dihedral
/// angle), shared between the edge endpoints and divided by the lumped vertex area.
VertexScalarField normal_divergence(const TriangleMesh& mesh);

/// |div n - 2H| per vertex.
VertexScalarField curvature_identity_residuals(const TriangleMesh& mesh);
/// max_v |div n - 2H|.
double curvature_identity_residual(const TriangleMesh& mesh);

/// Lumped quadrature sum_v a_v f_v.
double integrate_surface(const TriangleMesh& mesh, const VertexScalarField& f);

} // namespace curvbc
