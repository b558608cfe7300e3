#include <curvbc/errors.h>
#include <curvbc/surface_mesh.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace curvbc {

namespace {

double cotangent(const Vec3& a, const Vec3& b)
{
    return a.dot(b) / a.cross(b).norm();
}

// CSR-style adjacency from (key, value) pairs.
void build_csr(
    int n,
    std::vector<std::pair<int, int>>& pairs,
    std::vector<int>& offsets,
    std::vector<int>& indices)
{
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    offsets.assign(n + 1, 0);
    for (const auto& [k, v] : pairs) {
        (void)v;
        offsets[k + 1]++;
    }
    for (int i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    indices.resize(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) indices[i] = pairs[i].second;
}

Vec3 any_perpendicular(const Vec3& n)
{
    const Vec3 axis = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    return (axis - axis.dot(n) * n).normalized();
}

} // namespace

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : m_vertices(std::move(vertices))
    , m_triangles(std::move(triangles))
{
    const int nv = num_vertices();
    const int nf = num_faces();
    if (nv == 0 || nf == 0) throw MeshTopologyError("mesh has no vertices or no faces");

    for (int f = 0; f < nf; ++f) {
        const auto& t = m_triangles[f];
        for (int i = 0; i < 3; ++i) {
            if (t[i] < 0 || t[i] >= nv) {
                throw MeshTopologyError("face " + std::to_string(f) + " references vertex "
                    + std::to_string(t[i]) + " out of range");
            }
        }
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
            throw MeshTopologyError("face " + std::to_string(f) + " repeats a vertex");
        }
    }

    // Every directed edge exactly once, and its reverse exactly once.
    std::map<std::pair<int, int>, int> directed;
    for (int f = 0; f < nf; ++f) {
        const auto& t = m_triangles[f];
        for (int i = 0; i < 3; ++i) {
            const auto key = std::make_pair(t[i], t[(i + 1) % 3]);
            if (++directed[key] > 1) {
                throw MeshTopologyError("edge (" + std::to_string(key.first) + ", "
                    + std::to_string(key.second)
                    + ") is traversed twice in the same direction (non-manifold or inconsistent "
                      "orientation) at face " + std::to_string(f));
            }
        }
    }
    double edge_length_sum = 0.0;
    for (const auto& [key, count] : directed) {
        (void)count;
        if (!directed.contains({key.second, key.first})) {
            throw MeshTopologyError("edge (" + std::to_string(key.first) + ", "
                + std::to_string(key.second) + ") has no opposite half-edge; mesh is not closed");
        }
        if (key.first < key.second) {
            ++m_num_edges;
            edge_length_sum += (m_vertices[key.first] - m_vertices[key.second]).norm();
        }
    }
    m_mean_edge_length = edge_length_sum / m_num_edges;

    m_face_areas.resize(nf);
    m_face_normals.resize(nf);
    m_basis_gradients.resize(nf);
    double area_sum = 0.0;
    for (int f = 0; f < nf; ++f) {
        const auto& t = m_triangles[f];
        const Vec3 n = (m_vertices[t[1]] - m_vertices[t[0]]).cross(m_vertices[t[2]] - m_vertices[t[0]]);
        m_face_areas[f] = 0.5 * n.norm();
        area_sum += m_face_areas[f];
    }
    const double mean_area = area_sum / nf;
    for (int f = 0; f < nf; ++f) {
        if (!(m_face_areas[f] > 1e-12 * mean_area)) {
            throw MeshQualityError("face " + std::to_string(f) + " is degenerate (area "
                + std::to_string(m_face_areas[f]) + ")");
        }
        const auto& t = m_triangles[f];
        const Vec3 n = (m_vertices[t[1]] - m_vertices[t[0]]).cross(m_vertices[t[2]] - m_vertices[t[0]]);
        m_face_normals[f] = n / n.norm();
        for (int i = 0; i < 3; ++i) {
            // Edge opposite corner i, counter-clockwise.
            const Vec3 e = m_vertices[t[(i + 2) % 3]] - m_vertices[t[(i + 1) % 3]];
            m_basis_gradients[f][i] = m_face_normals[f].cross(e) / (2.0 * m_face_areas[f]);
        }
    }
    m_total_area = area_sum;

    // Mixed Voronoi areas.
    m_vertex_areas = Eigen::VectorXd::Zero(nv);
    for (int f = 0; f < nf; ++f) {
        const auto& t = m_triangles[f];
        const double area = m_face_areas[f];
        std::array<Vec3, 3> p{m_vertices[t[0]], m_vertices[t[1]], m_vertices[t[2]]};
        int obtuse = -1;
        for (int i = 0; i < 3; ++i) {
            if ((p[(i + 1) % 3] - p[i]).dot(p[(i + 2) % 3] - p[i]) < 0.0) obtuse = i;
        }
        if (obtuse < 0) {
            for (int i = 0; i < 3; ++i) {
                const int j = (i + 1) % 3;
                const int k = (i + 2) % 3;
                const double cot_k = cotangent(p[i] - p[k], p[j] - p[k]);
                const double cot_j = cotangent(p[i] - p[j], p[k] - p[j]);
                m_vertex_areas[t[i]] += ((p[j] - p[i]).squaredNorm() * cot_k
                                            + (p[k] - p[i]).squaredNorm() * cot_j)
                    / 8.0;
            }
        } else {
            for (int i = 0; i < 3; ++i) {
                m_vertex_areas[t[i]] += (i == obtuse) ? area / 2.0 : area / 4.0;
            }
        }
    }

    std::vector<std::pair<int, int>> vf, vv;
    vf.reserve(3 * nf);
    vv.reserve(6 * nf);
    for (int f = 0; f < nf; ++f) {
        const auto& t = m_triangles[f];
        for (int i = 0; i < 3; ++i) {
            vf.emplace_back(t[i], f);
            vv.emplace_back(t[i], t[(i + 1) % 3]);
            vv.emplace_back(t[(i + 1) % 3], t[i]);
        }
    }
    build_csr(nv, vf, m_vf_offsets, m_vf_indices);
    build_csr(nv, vv, m_vv_offsets, m_vv_indices);

    // Max's weights: e1 x e2 / (|e1|^2 |e2|^2) per corner, exact for vertices on a sphere.
    m_vertex_normals.assign(nv, Vec3::Zero());
    for (int f = 0; f < nf; ++f) {
        const auto& t = m_triangles[f];
        for (int i = 0; i < 3; ++i) {
            const Vec3 e1 = m_vertices[t[(i + 1) % 3]] - m_vertices[t[i]];
            const Vec3 e2 = m_vertices[t[(i + 2) % 3]] - m_vertices[t[i]];
            m_vertex_normals[t[i]] += e1.cross(e2) / (e1.squaredNorm() * e2.squaredNorm());
        }
    }
    for (int v = 0; v < nv; ++v) {
        if (m_vf_offsets[v + 1] == m_vf_offsets[v]) {
            throw MeshTopologyError("vertex " + std::to_string(v) + " is not referenced by any face");
        }
        m_vertex_normals[v].normalize();
    }
}

std::span<const int> TriangleMesh::vertex_faces(int v) const
{
    return {m_vf_indices.data() + m_vf_offsets[v],
        static_cast<std::size_t>(m_vf_offsets[v + 1] - m_vf_offsets[v])};
}

std::span<const int> TriangleMesh::vertex_neighbors(int v) const
{
    return {m_vv_indices.data() + m_vv_offsets[v],
        static_cast<std::size_t>(m_vv_offsets[v + 1] - m_vv_offsets[v])};
}

Eigen::Matrix3d TriangleMesh::vertex_projector(int v) const
{
    const Vec3& n = m_vertex_normals[v];
    return Eigen::Matrix3d::Identity() - n * n.transpose();
}

Eigen::Matrix3d TriangleMesh::face_projector(int f) const
{
    const Vec3& n = m_face_normals[f];
    return Eigen::Matrix3d::Identity() - n * n.transpose();
}

TriangleMesh TriangleMesh::flipped() const
{
    std::vector<Triangle> flipped = m_triangles;
    for (auto& t : flipped) std::swap(t[1], t[2]);
    return TriangleMesh(m_vertices, std::move(flipped));
}

Eigen::Vector2d ShapeOperator::principal_curvatures() const
{
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(matrix);
    return eig.eigenvalues();
}

Eigen::Matrix3d ShapeOperator::ambient() const
{
    Eigen::Matrix<double, 3, 2> frame;
    frame << t1, t2;
    return frame * matrix * frame.transpose();
}

TriangleMesh build_icosphere(double radius, int level)
{
    if (!(radius > 0.0)) throw ParameterError("icosphere radius must be positive");
    if (level < 0 || level > 7) {
        throw ParameterError("icosphere subdivision level " + std::to_string(level)
            + " outside [0, 7]");
    }

    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> vertices = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
        {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
        {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
    };
    std::vector<Triangle> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };
    for (auto& p : vertices) p.normalize();

    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> midpoints;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoints.find(key);
            if (it != midpoints.end()) return it->second;
            vertices.push_back((vertices[a] + vertices[b]).normalized());
            const int id = static_cast<int>(vertices.size()) - 1;
            midpoints.emplace(key, id);
            return id;
        };
        std::vector<Triangle> refined;
        refined.reserve(4 * faces.size());
        for (const auto& f : faces) {
            const int a = midpoint(f[0], f[1]);
            const int b = midpoint(f[1], f[2]);
            const int c = midpoint(f[2], f[0]);
            refined.push_back({f[0], a, c});
            refined.push_back({f[1], b, a});
            refined.push_back({f[2], c, b});
            refined.push_back({a, b, c});
        }
        faces = std::move(refined);
    }

    for (auto& p : vertices) p *= radius;
    return TriangleMesh(std::move(vertices), std::move(faces));
}

VertexScalarField compute_mean_curvature(const TriangleMesh& mesh)
{
    // Area gradient: dA/dx_v = 1/2 sum_j (cot a + cot b)(x_v - x_j) = 2 a_v H_v n_v on a sphere.
    std::vector<Vec3> area_gradient(mesh.num_vertices(), Vec3::Zero());
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto& t = mesh.triangle(f);
        for (int i = 0; i < 3; ++i) {
            const int a = t[i];
            const int b = t[(i + 1) % 3];
            const int c = t[(i + 2) % 3];
            const Vec3& pa = mesh.position(a);
            const Vec3& pb = mesh.position(b);
            const Vec3& pc = mesh.position(c);
            // Angle at c is opposite edge (a, b).
            const double w = 0.5 * cotangent(pa - pc, pb - pc);
            area_gradient[a] += w * (pa - pb);
            area_gradient[b] += w * (pb - pa);
        }
    }
    VertexScalarField H(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        H[v] = area_gradient[v].dot(mesh.vertex_normal(v)) / (2.0 * mesh.vertex_area(v));
    }
    return H;
}

CurvatureData compute_curvature(const TriangleMesh& mesh)
{
    CurvatureData data;
    data.mean_curvature = compute_mean_curvature(mesh);
    const int nv = mesh.num_vertices();
    data.shape_operators.resize(nv);

    for (int v = 0; v < nv; ++v) {
        const Vec3& n = mesh.vertex_normal(v);
        ShapeOperator& op = data.shape_operators[v];
        op.t1 = any_perpendicular(n);
        op.t2 = n.cross(op.t1);

        // dn ~ S dx in the tangent frame, S symmetric: unknowns (s11, s12, s22).
        const auto ring = mesh.vertex_neighbors(v);
        const int m = static_cast<int>(ring.size());
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * m, 3);
        Eigen::VectorXd b(2 * m);
        for (int r = 0; r < m; ++r) {
            const int j = ring[r];
            const Vec3 dx = mesh.position(j) - mesh.position(v);
            const Vec3 dn = mesh.vertex_normal(j) - n;
            const double x1 = op.t1.dot(dx);
            const double x2 = op.t2.dot(dx);
            A(2 * r, 0) = x1;
            A(2 * r, 1) = x2;
            A(2 * r + 1, 1) = x1;
            A(2 * r + 1, 2) = x2;
            b[2 * r] = op.t1.dot(dn);
            b[2 * r + 1] = op.t2.dot(dn);
        }
        const double H = data.mean_curvature[v];
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        if (m < 2 || sv[2] <= 1e-8 * sv[0]) {
            data.flagged_vertices.push_back(v);
            op.matrix = H * Eigen::Matrix2d::Identity();
            continue;
        }
        const Eigen::Vector3d s = svd.solve(b);
        op.matrix << s[0], s[1], s[1], s[2];
        // Trace correction so that tr S = 2H exactly.
        op.matrix += 0.5 * (2.0 * H - op.matrix.trace()) * Eigen::Matrix2d::Identity();
    }

    const FaceTangentField face_grad = surface_gradient(mesh, data.mean_curvature);
    data.mean_curvature_gradient.assign(nv, Vec3::Zero());
    for (int v = 0; v < nv; ++v) {
        double weight = 0.0;
        Vec3 g = Vec3::Zero();
        for (int f : mesh.vertex_faces(v)) {
            g += mesh.face_area(f) * face_grad[f];
            weight += mesh.face_area(f);
        }
        data.mean_curvature_gradient[v] = mesh.vertex_projector(v) * (g / weight);
    }
    return data;
}

FaceTangentField surface_gradient(const TriangleMesh& mesh, const VertexScalarField& f)
{
    if (f.size() != mesh.num_vertices()) {
        throw DimensionError("scalar field has " + std::to_string(f.size()) + " entries, mesh has "
            + std::to_string(mesh.num_vertices()) + " vertices");
    }
    FaceTangentField grad(mesh.num_faces());
    for (int face = 0; face < mesh.num_faces(); ++face) {
        const auto& t = mesh.triangle(face);
        grad[face] = f[t[0]] * mesh.basis_gradient(face, 0) + f[t[1]] * mesh.basis_gradient(face, 1)
            + f[t[2]] * mesh.basis_gradient(face, 2);
    }
    return grad;
}

VertexScalarField surface_divergence(const TriangleMesh& mesh, const FaceTangentField& field)
{
    if (static_cast<int>(field.size()) != mesh.num_faces()) {
        throw DimensionError("face field has " + std::to_string(field.size()) + " entries, mesh has "
            + std::to_string(mesh.num_faces()) + " faces");
    }
    VertexScalarField div = VertexScalarField::Zero(mesh.num_vertices());
    for (int face = 0; face < mesh.num_faces(); ++face) {
        const auto& t = mesh.triangle(face);
        for (int i = 0; i < 3; ++i) {
            div[t[i]] -= mesh.face_area(face) * mesh.basis_gradient(face, i).dot(field[face]);
        }
    }
    return div.cwiseQuotient(mesh.vertex_areas());
}

FaceTangentField vertex_to_face_tangent(const TriangleMesh& mesh, std::span<const Vec3> values)
{
    if (static_cast<int>(values.size()) != mesh.num_vertices()) {
        throw DimensionError("vertex vector field length does not match vertex count");
    }
    FaceTangentField out(mesh.num_faces());
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto& t = mesh.triangle(f);
        const Vec3 avg = (values[t[0]] + values[t[1]] + values[t[2]]) / 3.0;
        const Vec3& n = mesh.face_normal(f);
        out[f] = avg - n.dot(avg) * n;
    }
    return out;
}

VertexScalarField normal_divergence(const TriangleMesh& mesh)
{
    // The face-normal field is piecewise constant, so its divergence is concentrated on edges: the
    // flux jump across edge e is |e| theta_e (signed dihedral angle), split evenly between the two
    // endpoints and normalized by the lumped vertex area.
    VertexScalarField div = VertexScalarField::Zero(mesh.num_vertices());
    std::map<std::pair<int, int>, int> left_face;
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto& t = mesh.triangle(f);
        for (int i = 0; i < 3; ++i) left_face[{t[i], t[(i + 1) % 3]}] = f;
    }
    for (const auto& [edge, f1] : left_face) {
        const auto [a, b] = edge;
        if (a > b) continue;
        const int f2 = left_face.at({b, a});
        const Vec3 e = mesh.position(b) - mesh.position(a);
        const Vec3& n1 = mesh.face_normal(f1);
        const Vec3& n2 = mesh.face_normal(f2);
        // Positive where the surface bends away from the outward normal (convex).
        const double theta = std::atan2(n1.cross(n2).dot(e.normalized()), n1.dot(n2));
        const double flux = 0.5 * e.norm() * theta;
        div[a] += flux;
        div[b] += flux;
    }
    return div.cwiseQuotient(mesh.vertex_areas());
}

VertexScalarField curvature_identity_residuals(const TriangleMesh& mesh)
{
    return (normal_divergence(mesh) - 2.0 * compute_mean_curvature(mesh)).cwiseAbs();
}

double curvature_identity_residual(const TriangleMesh& mesh)
{
    return curvature_identity_residuals(mesh).maxCoeff();
}

double integrate_surface(const TriangleMesh& mesh, const VertexScalarField& f)
{
    if (f.size() != mesh.num_vertices()) {
        throw DimensionError("scalar field length does not match vertex count");
    }
    return mesh.vertex_areas().dot(f);
}

} // namespace curvbc
