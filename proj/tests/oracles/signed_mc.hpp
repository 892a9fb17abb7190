#pragma once

// Reference signed marching cubes over an SDF callback, written separately
// from the library extractor: it walks cells in its own loop, interpolates
// with the classic VertexInterp form (from the first corner of the table's
// edge), emits a triangle soup and merges vertices by quantized position.
// Only the case tables are shared, as data.

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <tuple>
#include <vector>

#include "udfmc/mc_tables.hpp"
#include "udfmc/vec3.hpp"

namespace oracle {

using udfmc::Vec3;

struct SoupMesh {
    std::vector<Vec3> vertices;                     // unique by quantized position
    std::vector<std::array<std::size_t, 3>> faces;  // non-degenerate triangles only
};

inline SoupMesh signed_marching_cubes(const std::function<double(const Vec3&)>& sdf, Vec3 lo, Vec3 hi, int n) {
    // Corner (dx, dy, dz) for the table's corner numbering.
    static const int corner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                     {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
    const double h[3] = {(hi.x - lo.x) / (n - 1), (hi.y - lo.y) / (n - 1), (hi.z - lo.z) / (n - 1)};
    auto pos = [&](int i, int j, int k) { return Vec3{lo.x + h[0] * i, lo.y + h[1] * j, lo.z + h[2] * k}; };

    std::vector<double> value(static_cast<std::size_t>(n) * n * n);
    auto at = [&](int i, int j, int k) -> double& { return value[(static_cast<std::size_t>(k) * n + j) * n + i]; };
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) at(i, j, k) = sdf(pos(i, j, k));

    SoupMesh out;
    std::map<std::tuple<long long, long long, long long>, std::size_t> index;
    auto key_of = [](const Vec3& p) {
        const double q = 1e9;
        return std::make_tuple(std::llround(p.x * q), std::llround(p.y * q), std::llround(p.z * q));
    };
    auto add_vertex = [&](const Vec3& p) {
        auto [it, inserted] = index.emplace(key_of(p), out.vertices.size());
        if (inserted) out.vertices.push_back(p);
        return it->second;
    };

    for (int k = 0; k + 1 < n; ++k)
        for (int j = 0; j + 1 < n; ++j)
            for (int i = 0; i + 1 < n; ++i) {
                double v[8];
                Vec3 p[8];
                int cube = 0;
                for (int c = 0; c < 8; ++c) {
                    const int ci = i + corner[c][0], cj = j + corner[c][1], ck = k + corner[c][2];
                    v[c] = at(ci, cj, ck);
                    p[c] = pos(ci, cj, ck);
                    if (v[c] < 0.0) cube |= 1 << c;
                }
                const auto edges = udfmc::mc::kEdgeTable[cube];
                if (edges == 0) continue;
                Vec3 ev[12];
                for (int e = 0; e < 12; ++e) {
                    if (!(edges & (1 << e))) continue;
                    const int a = udfmc::mc::kEdgeCorners[e][0], b = udfmc::mc::kEdgeCorners[e][1];
                    if (v[a] == 0.0) ev[e] = p[a];
                    else if (v[b] == 0.0) ev[e] = p[b];
                    else {
                        const double mu = v[a] / (v[a] - v[b]);
                        ev[e] = p[a] + mu * (p[b] - p[a]);
                    }
                }
                const auto& tri = udfmc::mc::kTriTable[cube];
                for (int t = 0; tri[t] != -1; t += 3) {
                    const std::size_t a = add_vertex(ev[tri[t]]);
                    const std::size_t b = add_vertex(ev[tri[t + 1]]);
                    const std::size_t c = add_vertex(ev[tri[t + 2]]);
                    if (a == b || b == c || a == c) continue;
                    out.faces.push_back({a, b, c});
                }
            }
    return out;
}

}  // namespace oracle
