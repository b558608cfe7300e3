#include <doctest.h>

#include <curvbc/errors.h>
#include <curvbc/mesh_io.h>

#include "fixtures.h"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace curvbc;

TEST_CASE("off_round_trip")
{
    std::istringstream in("OFF\n# tetrahedron\n4 4 6\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n"
                          "3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n");
    const TriangleMesh mesh = read_off(in);
    CHECK(mesh.num_vertices() == 4);
    CHECK(mesh.num_faces() == 4);
    CHECK(mesh.total_area() == doctest::Approx(fixtures::tetrahedron().total_area()));
}

TEST_CASE("obj_round_trip")
{
    const TriangleMesh cube = fixtures::cube(2);
    std::stringstream buf;
    write_obj(buf, cube);
    const TriangleMesh back = read_obj(buf);
    REQUIRE(back.num_vertices() == cube.num_vertices());
    REQUIRE(back.num_faces() == cube.num_faces());
    for (int v = 0; v < cube.num_vertices(); ++v) CHECK((back.position(v) - cube.position(v)).norm() <= 1e-15);
    for (int f = 0; f < cube.num_faces(); ++f) CHECK(back.triangle(f) == cube.triangle(f));

    std::istringstream slashes("v 1 1 1\nv 1 -1 -1\nv -1 1 -1\nv -1 -1 1\nvn 0 0 1\n"
                               "f 1//1 2//1 3//1\nf 1/1/1 4/1/1 2/1/1\nf 1 3 4\nf 2 4 3\n");
    CHECK(read_obj(slashes).num_faces() == 4);
}

TEST_CASE("read_mesh_dispatches_on_extension")
{
    const auto dir = std::filesystem::temp_directory_path() / "curvbc_mesh_io_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "t.obj");
        write_obj(out, fixtures::tetrahedron());
    }
    CHECK(read_mesh(dir / "t.obj").num_vertices() == 4);
    CHECK_THROWS_AS(read_mesh(dir / "t.stl"), IoError);
    CHECK_THROWS_AS(read_mesh(dir / "missing.off"), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("malformed_input_is_rejected")
{
    auto off = [](const char* text) {
        std::istringstream in(text);
        return read_off(in);
    };
    CHECK_THROWS_AS(off(""), IoError);
    CHECK_THROWS_AS(off("PLY\n"), IoError);
    CHECK_THROWS_AS(off("OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n"), IoError);
    CHECK_THROWS_AS(off("OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n4 0 1 2 3\n"), IoError);
    std::istringstream quad("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
    CHECK_THROWS_AS(read_obj(quad), IoError);
    // Parses, but the surface is open.
    CHECK_THROWS_AS(off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n"), MeshTopologyError);
}

TEST_CASE("vertex_csv_layout")
{
    const TriangleMesh mesh = fixtures::tetrahedron();
    Eigen::VectorXd h(4);
    h << 0.5, 1.0, 1.5, 2.0;
    std::ostringstream out;
    write_vertex_csv(out, mesh.vertices(), {{"value", h}}, {"curvbc test"});
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "# curvbc test");
    std::getline(in, line);
    CHECK(line == "vertex_id,x,y,z,value");
    std::getline(in, line);
    CHECK(line.rfind("0,1,1,1,0.5", 0) == 0);
    int rows = 1;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);
    CHECK_THROWS_AS(write_vertex_csv(out, mesh.vertices(), {{"bad", Eigen::VectorXd::Zero(3)}}), DimensionError);
}
