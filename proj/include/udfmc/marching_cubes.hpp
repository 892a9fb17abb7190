#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "grid.hpp"
#include "mc_tables.hpp"
#include "mesh.hpp"
#include "parallel.hpp"

namespace udfmc {

/// Vertex emitted inside one cell, keyed by the lattice feature it lies on.
/// Keys below 3 * num_corners identify an edge (3 * lower_corner + axis); a
/// vertex that lands exactly on a corner is keyed by that corner instead, so
/// coincident vertices from different edges weld together.
struct CellVertex {
    std::uint64_t key = 0;
    Point3 position;
};

using CellTriangle = std::array<CellVertex, 3>;

namespace detail {

inline int edge_axis(const std::array<std::uint32_t, 3>& a, const std::array<std::uint32_t, 3>& b) {
    return a[0] != b[0] ? 0 : (a[1] != b[1] ? 1 : 2);
}

}  // namespace detail

/// Case index: bit k set when corner k is negative. The sign bit decides, so a
/// corner holding -0.0 counts as inside and +0.0 as outside.
inline int case_index(const std::array<double, 8>& values) {
    int c = 0;
    for (int k = 0; k < 8; ++k)
        if (std::signbit(values[k])) c |= 1 << k;
    return c;
}

/// Marching-cubes triangles for one cell given signed corner values and a case
/// index. Each cut edge is interpolated at t = v_lo / (v_lo - v_hi) measured from
/// its lower-indexed corner, so both cells sharing an edge produce the same bits.
inline std::vector<CellTriangle> triangulate_case(const GridSpec& spec, std::uint64_t cell,
                                                  const std::array<double, 8>& values, int case_idx) {
    std::vector<CellTriangle> out;
    const auto edges = mc::kEdgeTable[static_cast<std::size_t>(case_idx)];
    if (edges == 0) return out;

    const auto cc = spec.cell_coords(cell);
    std::array<CellVertex, 12> verts{};
    const std::uint64_t corner_keys = 3 * spec.num_corners();
    for (int e = 0; e < 12; ++e) {
        if (!(edges & (1 << e))) continue;
        int a = mc::kEdgeCorners[e][0], b = mc::kEdgeCorners[e][1];
        std::array<std::uint32_t, 3> pa{cc[0] + kCornerOffsets[a][0], cc[1] + kCornerOffsets[a][1],
                                        cc[2] + kCornerOffsets[a][2]};
        std::array<std::uint32_t, 3> pb{cc[0] + kCornerOffsets[b][0], cc[1] + kCornerOffsets[b][1],
                                        cc[2] + kCornerOffsets[b][2]};
        const int axis = detail::edge_axis(pa, pb);
        if (pa[axis] > pb[axis]) {
            std::swap(a, b);
            std::swap(pa, pb);
        }
        const double va = values[a], vb = values[b];
        const double denom = va - vb;
        const double t = denom != 0.0 ? va / denom : 0.5;
        const std::uint64_t lo = spec.corner_index(pa[0], pa[1], pa[2]);
        const Point3 xa = spec.corner_position(pa[0], pa[1], pa[2]);
        const Point3 xb = spec.corner_position(pb[0], pb[1], pb[2]);
        if (t <= 0.0) {
            verts[e] = {corner_keys + lo, xa};
        } else if (t >= 1.0) {
            verts[e] = {corner_keys + spec.corner_index(pb[0], pb[1], pb[2]), xb};
        } else {
            Point3 p = xa;
            p[axis] = xa[axis] + t * (xb[axis] - xa[axis]);
            verts[e] = {3 * lo + static_cast<std::uint64_t>(axis), p};
        }
    }
    const auto& tris = mc::kTriTable[static_cast<std::size_t>(case_idx)];
    for (int i = 0; tris[i] != -1; i += 3) out.push_back({verts[tris[i]], verts[tris[i + 1]], verts[tris[i + 2]]});
    return out;
}

/// Merges triangle batches (given in ascending cell order) into an indexed
/// mesh. Vertex indices follow first appearance; triangles that collapse onto
/// a repeated key are dropped.
inline TriMesh weld_vertices(const std::vector<std::vector<CellTriangle>>& batches) {
    TriMesh mesh;
    std::unordered_map<std::uint64_t, std::uint32_t> index;
    for (const auto& tris : batches) {
        for (const auto& tri : tris) {
            if (tri[0].key == tri[1].key || tri[1].key == tri[2].key || tri[0].key == tri[2].key) continue;
            Face f{};
            for (int k = 0; k < 3; ++k) {
                auto [it, inserted] = index.try_emplace(tri[k].key, static_cast<std::uint32_t>(mesh.vertices.size()));
                if (inserted) {
                    mesh.vertices.push_back(tri[k].position);
                    mesh.vertex_edge_ids.push_back(tri[k].key);
                }
                f[k] = it->second;
            }
            mesh.faces.push_back(f);
        }
    }
    return mesh;
}

/// Standard marching cubes on the iso-level `iso` of per-corner scalar values
/// (x-fastest, one per lattice corner). Corners below iso are inside.
inline TriMesh marching_cubes(const std::vector<double>& values, const GridSpec& spec, double iso = 0.0,
                              unsigned threads = 0) {
    spec.validate();
    if (values.size() != spec.num_corners()) throw std::invalid_argument("marching_cubes: value count mismatch");
    const std::uint32_t slabs = spec.cells_per_axis();
    const std::uint64_t per_slab = std::uint64_t{slabs} * slabs;
    std::vector<std::vector<CellTriangle>> per_slab_tris(slabs);
    parallel_for(slabs, threads, [&](std::size_t k) {
        auto& out = per_slab_tris[k];
        for (std::uint64_t cell = k * per_slab; cell < (k + 1) * per_slab; ++cell) {
            std::array<double, 8> v{};
            const auto corners = cell_corners(spec, cell);
            for (int c = 0; c < 8; ++c) v[c] = values[corners[c]] - iso;
            const int ci = case_index(v);
            if (ci == 0 || ci == 255) continue;
            const auto tris = triangulate_case(spec, cell, v, ci);
            out.insert(out.end(), tris.begin(), tris.end());
        }
    });
    return weld_vertices(per_slab_tris);
}

}  // namespace udfmc
