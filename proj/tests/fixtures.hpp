#pragma once

// Small meshes shared by the test suites.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "udfmc/mesh.hpp"

namespace fixtures {

using udfmc::Point3;
using udfmc::TriMesh;

/// Axis-aligned square [x0, x1] x [y0, y1] at height z, split into n x n quads.
inline TriMesh square_patch(double x0, double x1, double y0, double y1, double z, int n = 1) {
    TriMesh m;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            m.vertices.push_back({x0 + (x1 - x0) * i / n, y0 + (y1 - y0) * j / n, z});
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const auto a = static_cast<std::uint32_t>(j * (n + 1) + i);
            const auto b = a + 1, c = a + static_cast<std::uint32_t>(n + 1), d = c + 1;
            m.faces.push_back({a, b, d});
            m.faces.push_back({a, d, c});
        }
    return m;
}

/// Unit square centred in the default [-1, 1]^3 domain. The height is kept off
/// the lattice planes of the usual resolutions.
inline TriMesh unit_patch(double z = 0.0031) { return square_patch(-0.5, 0.5, -0.5, 0.5, z); }

inline TriMesh append(TriMesh a, const TriMesh& b) {
    const auto off = static_cast<std::uint32_t>(a.vertices.size());
    a.vertices.insert(a.vertices.end(), b.vertices.begin(), b.vertices.end());
    for (auto f : b.faces) a.faces.push_back({f[0] + off, f[1] + off, f[2] + off});
    return a;
}

/// Disk of radius r at height z as a fan of `segments` triangles.
inline TriMesh disk(double r, double z, int segments) {
    TriMesh m;
    m.vertices.push_back({0.0, 0.0, z});
    for (int i = 0; i < segments; ++i) {
        const double t = 2.0 * std::numbers::pi * i / segments;
        m.vertices.push_back({r * std::cos(t), r * std::sin(t), z});
    }
    for (int i = 0; i < segments; ++i)
        m.faces.push_back({0, static_cast<std::uint32_t>(1 + i), static_cast<std::uint32_t>(1 + (i + 1) % segments)});
    return m;
}

/// Open cylinder of radius r about the z axis, z in [z0, z1].
inline TriMesh cylinder(double r, double z0, double z1, int segments, int rings) {
    TriMesh m;
    for (int k = 0; k <= rings; ++k)
        for (int i = 0; i < segments; ++i) {
            const double t = 2.0 * std::numbers::pi * i / segments;
            m.vertices.push_back({r * std::cos(t), r * std::sin(t), z0 + (z1 - z0) * k / rings});
        }
    auto at = [&](int k, int i) { return static_cast<std::uint32_t>(k * segments + (i % segments)); };
    for (int k = 0; k < rings; ++k)
        for (int i = 0; i < segments; ++i) {
            m.faces.push_back({at(k, i), at(k, i + 1), at(k + 1, i + 1)});
            m.faces.push_back({at(k, i), at(k + 1, i + 1), at(k + 1, i)});
        }
    return m;
}

/// Closed octahedron with unit circumradius.
inline TriMesh octahedron() {
    TriMesh m;
    m.vertices = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    m.faces = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4}, {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
    return m;
}

}  // namespace fixtures
