#pragma once

#include <curvbc/surface_mesh.h>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace curvbc {

/// ASCII OFF, triangles only.
TriangleMesh read_off(std::istream& in);
/// ASCII OBJ, `v` and triangular `f` records; texture/normal indices are ignored.
TriangleMesh read_obj(std::istream& in);
/// Dispatches on the file extension (.off / .obj).
TriangleMesh read_mesh(const std::filesystem::path& path);

void write_obj(std::ostream& out, const TriangleMesh& mesh);

/// Named per-vertex columns for CSV export.
struct VertexColumn
{
    std::string name;
    Eigen::VectorXd values;
};

///
/// Writes `vertex_id,x,y,z,<columns...>` rows. `header_lines` are emitted first, each prefixed
/// with "# ".
///
void write_vertex_csv(
    std::ostream& out,
    const std::vector<Vec3>& positions,
    const std::vector<VertexColumn>& columns,
    const std::vector<std::string>& header_lines = {});

} // namespace curvbc
