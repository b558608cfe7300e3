#include <curvbc/errors.h>
#include <curvbc/mesh_io.h>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace curvbc {

namespace {

// Next non-empty line with '#' comments stripped.
bool next_record(std::istream& in, std::string& line)
{
    while (std::getline(in, line)) {
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
}

} // namespace

TriangleMesh read_off(std::istream& in)
{
    std::string line;
    if (!next_record(in, line)) throw IoError("OFF: empty input");
    std::istringstream head(line);
    std::string magic;
    head >> magic;
    if (magic != "OFF") throw IoError("OFF: missing OFF header");

    int nv = -1, nf = -1, ne = 0;
    if (!(head >> nv >> nf >> ne)) {
        if (!next_record(in, line)) throw IoError("OFF: missing counts");
        std::istringstream counts(line);
        if (!(counts >> nv >> nf)) throw IoError("OFF: malformed counts line");
    }
    if (nv <= 0 || nf <= 0) throw IoError("OFF: non-positive vertex or face count");

    std::vector<Vec3> vertices(nv);
    for (int i = 0; i < nv; ++i) {
        if (!next_record(in, line)) throw IoError("OFF: truncated vertex list");
        std::istringstream rec(line);
        if (!(rec >> vertices[i].x() >> vertices[i].y() >> vertices[i].z())) {
            throw IoError("OFF: malformed vertex " + std::to_string(i));
        }
    }
    std::vector<Triangle> faces(nf);
    for (int i = 0; i < nf; ++i) {
        if (!next_record(in, line)) throw IoError("OFF: truncated face list");
        std::istringstream rec(line);
        int n = 0;
        rec >> n;
        if (n != 3) throw IoError("OFF: face " + std::to_string(i) + " is not a triangle");
        if (!(rec >> faces[i][0] >> faces[i][1] >> faces[i][2])) {
            throw IoError("OFF: malformed face " + std::to_string(i));
        }
    }
    return TriangleMesh(std::move(vertices), std::move(faces));
}

TriangleMesh read_obj(std::istream& in)
{
    std::vector<Vec3> vertices;
    std::vector<Triangle> faces;
    std::string line;
    while (next_record(in, line)) {
        std::istringstream rec(line);
        std::string tag;
        rec >> tag;
        if (tag == "v") {
            Vec3 p;
            if (!(rec >> p.x() >> p.y() >> p.z())) throw IoError("OBJ: malformed vertex record");
            vertices.push_back(p);
        } else if (tag == "f") {
            std::vector<int> ids;
            std::string token;
            while (rec >> token) {
                int id = std::stoi(token.substr(0, token.find('/')));
                if (id < 0) id += static_cast<int>(vertices.size()) + 1;
                ids.push_back(id - 1);
            }
            if (ids.size() != 3) throw IoError("OBJ: only triangular faces are supported");
            faces.push_back({ids[0], ids[1], ids[2]});
        }
    }
    return TriangleMesh(std::move(vertices), std::move(faces));
}

TriangleMesh read_mesh(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mesh file " + path.string());
    const auto ext = path.extension().string();
    if (ext == ".off" || ext == ".OFF") return read_off(in);
    if (ext == ".obj" || ext == ".OBJ") return read_obj(in);
    throw IoError("unsupported mesh extension '" + ext + "' (expected .off or .obj)");
}

void write_obj(std::ostream& out, const TriangleMesh& mesh)
{
    out << std::setprecision(17);
    for (const auto& p : mesh.vertices()) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    for (const auto& t : mesh.triangles()) {
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    }
}

void write_vertex_csv(
    std::ostream& out,
    const std::vector<Vec3>& positions,
    const std::vector<VertexColumn>& columns,
    const std::vector<std::string>& header_lines)
{
    for (const auto& h : header_lines) out << "# " << h << '\n';
    out << "vertex_id,x,y,z";
    for (const auto& c : columns) {
        if (c.values.size() != static_cast<Eigen::Index>(positions.size())) {
            throw DimensionError("column '" + c.name + "' length does not match vertex count");
        }
        out << ',' << c.name;
    }
    out << '\n' << std::setprecision(17);
    for (std::size_t v = 0; v < positions.size(); ++v) {
        out << v << ',' << positions[v].x() << ',' << positions[v].y() << ',' << positions[v].z();
        for (const auto& c : columns) out << ',' << c.values[static_cast<Eigen::Index>(v)];
        out << '\n';
    }
}

} // namespace curvbc
