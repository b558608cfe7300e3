#pragma once

#include <curvbc/surface_mesh.h>

#include <array>
#include <cmath>
#include <map>
#include <vector>

namespace fixtures {

/// Cube [-1, 1]^3 with an n x n grid of quads (two triangles each) on every face, outward winding.
inline curvbc::TriangleMesh cube(int n)
{
    using curvbc::Vec3;
    const std::array<std::array<Vec3, 3>, 6> sides{{
        {Vec3(1, -1, -1), Vec3(0, 2, 0), Vec3(0, 0, 2)},
        {Vec3(-1, -1, -1), Vec3(0, 0, 2), Vec3(0, 2, 0)},
        {Vec3(-1, 1, -1), Vec3(0, 0, 2), Vec3(2, 0, 0)},
        {Vec3(-1, -1, -1), Vec3(2, 0, 0), Vec3(0, 0, 2)},
        {Vec3(-1, -1, 1), Vec3(2, 0, 0), Vec3(0, 2, 0)},
        {Vec3(-1, -1, -1), Vec3(0, 2, 0), Vec3(2, 0, 0)},
    }};
    std::vector<Vec3> vertices;
    std::vector<curvbc::Triangle> faces;
    std::map<std::array<long, 3>, int> index;
    auto vertex = [&](const Vec3& x) {
        const std::array<long, 3> key{std::lround(x.x() * n), std::lround(x.y() * n), std::lround(x.z() * n)};
        auto [it, inserted] = index.try_emplace(key, static_cast<int>(vertices.size()));
        if (inserted) vertices.push_back(x);
        return it->second;
    };
    for (const auto& [origin, du, dv] : sides) {
        auto at = [&](int i, int j) { return vertex(origin + du * (double(i) / n) + dv * (double(j) / n)); };
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const int a = at(i, j), b = at(i + 1, j), c = at(i + 1, j + 1), d = at(i, j + 1);
                faces.push_back({a, b, c});
                faces.push_back({a, c, d});
            }
        }
    }
    return curvbc::TriangleMesh(std::move(vertices), std::move(faces));
}

/// Regular tetrahedron surface with outward winding.
inline curvbc::TriangleMesh tetrahedron()
{
    using curvbc::Vec3;
    return curvbc::TriangleMesh({Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)},
        {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}});
}

} // namespace fixtures
