#pragma once

// Pseudo-signed marching cubes on unsigned distance samples.
//
// Within each candidate cell, corner i gets s_i = sgn(g_anchor . g_i) * u_i where
// the anchor is the corner with the largest gradient norm (ties: smallest corner
// index) among those whose norm reaches grad_norm_min. The cell is then handled
// as an ordinary signed marching-cubes cell.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "field.hpp"
#include "grid.hpp"
#include "marching_cubes.hpp"
#include "mesh.hpp"
#include "parallel.hpp"

namespace udfmc {

enum class SkipReason { none, culled, no_valid_anchor, no_crossing };

inline const char* to_string(SkipReason r) {
    switch (r) {
        case SkipReason::none: return "none";
        case SkipReason::culled: return "culled";
        case SkipReason::no_valid_anchor: return "no-valid-anchor";
        case SkipReason::no_crossing: return "no-crossing";
    }
    return "unknown";
}

/// Fixed generic direction used to break ties at zero-valued corners.
inline const Vec3 kZeroTieDirection = normalized(Vec3{1.0, std::numbers::sqrt2, std::numbers::pi});

struct PseudoSignedCell {
    std::uint64_t cell = 0;
    std::array<std::uint64_t, 8> corners{};
    std::array<double, 8> s{};
    int anchor = -1;
    SkipReason skip = SkipReason::none;

    /// Marching-cubes case of the pseudo-signs (bit k set when s_k < 0).
    int case_index() const { return udfmc::case_index(s); }
};

/// Assigns pseudo-signs to one cell. `forced_anchor` (0..7) overrides the anchor
/// choice; it must still have a non-zero gradient.
inline PseudoSignedCell pseudo_sign_cell(const GridSamples& samples, std::uint64_t cell, double grad_norm_min,
                                         int forced_anchor = -1) {
    PseudoSignedCell out;
    out.cell = cell;
    out.corners = cell_corners(samples.spec, cell);

    if (forced_anchor >= 0) {
        const auto c = out.corners[static_cast<std::size_t>(forced_anchor)];
        if (!samples.degenerate[c] && norm(samples.g[c]) > 0.0) out.anchor = forced_anchor;
    } else {
        double best = -1.0;
        for (int k = 0; k < 8; ++k) {
            const auto c = out.corners[static_cast<std::size_t>(k)];
            if (samples.degenerate[c]) continue;
            const double n = norm(samples.g[c]);
            if (n >= grad_norm_min && n > best) {
                best = n;
                out.anchor = k;
            }
        }
    }
    if (out.anchor < 0) {
        out.skip = SkipReason::no_valid_anchor;
        return out;
    }

    const Vec3& ga = samples.g[out.corners[static_cast<std::size_t>(out.anchor)]];
    // A corner exactly on the surface has no gradient to compare. Its side is
    // decided as if the surface were nudged along kZeroTieDirection, which gives
    // neighbouring cells the same answer whatever their anchor polarity.
    const double zero_value = dot(ga, kZeroTieDirection) > 0.0 ? -0.0 : 0.0;
    bool any_negative = false;
    for (int k = 0; k < 8; ++k) {
        const auto c = out.corners[static_cast<std::size_t>(k)];
        const double u = samples.u[c];
        double& s = out.s[static_cast<std::size_t>(k)];
        if (u == 0.0) s = zero_value;
        else s = dot(ga, samples.g[c]) < 0.0 ? -u : u;
        any_negative |= std::signbit(s);
    }
    if (!any_negative) out.skip = SkipReason::no_crossing;
    return out;
}

/// Triangles for a pseudo-signed cell. The anchor fixes an arbitrary polarity,
/// so a case and its complement are triangulated identically (the lower of the
/// two table indices is used); the output is then independent of which side of
/// the surface the anchor sits on.
inline std::vector<CellTriangle> triangulate_cell(const PseudoSignedCell& cell, const GridSpec& spec) {
    if (cell.skip != SkipReason::none) return {};
    const int c = cell.case_index();
    const int canonical = std::min(c, 255 - c);
    if (canonical == 0) return {};
    std::array<double, 8> values = cell.s;
    if (canonical != c)
        for (auto& v : values) v = -v;
    return triangulate_case(spec, cell.cell, values, canonical);
}

struct ExtractOptions {
    double cull_factor = 1.0;
    double grad_norm_min = 0.3;
    unsigned threads = 0;
};

struct ExtractStats {
    std::uint64_t total_cells = 0;
    std::uint64_t candidate_cells = 0;
    std::uint64_t triangulated_cells = 0;
    std::uint64_t skipped_no_anchor = 0;
    std::uint64_t skipped_no_crossing = 0;
    std::uint64_t culled_cells = 0;
    /// Lattice edges cut by one processed cell but not by another processed
    /// cell sharing it (neighbouring anchors disagreeing on the sign partition).
    std::uint64_t inconsistent_edges = 0;
    double sample_seconds = 0.0;
    double extract_seconds = 0.0;
};

struct ExtractResult {
    TriMesh mesh;
    ExtractStats stats;
};

namespace detail {

inline std::array<std::uint64_t, 12> cell_edge_keys(const GridSpec& spec, std::uint64_t cell) {
    const auto cc = spec.cell_coords(cell);
    std::array<std::uint64_t, 12> keys{};
    for (int e = 0; e < 12; ++e) {
        const int a = mc::kEdgeCorners[e][0], b = mc::kEdgeCorners[e][1];
        std::array<std::uint32_t, 3> pa{cc[0] + kCornerOffsets[a][0], cc[1] + kCornerOffsets[a][1],
                                        cc[2] + kCornerOffsets[a][2]};
        std::array<std::uint32_t, 3> pb{cc[0] + kCornerOffsets[b][0], cc[1] + kCornerOffsets[b][1],
                                        cc[2] + kCornerOffsets[b][2]};
        const int axis = edge_axis(pa, pb);
        const auto& lo = pa[axis] < pb[axis] ? pa : pb;
        keys[e] = 3 * spec.corner_index(lo[0], lo[1], lo[2]) + static_cast<std::uint64_t>(axis);
    }
    return keys;
}

}  // namespace detail

/// Pseudo-signed extraction from precomputed samples. Cells are processed in
/// parallel; triangles are gathered per cell and welded in ascending cell order,
/// so the output does not depend on the thread count.
inline ExtractResult extract_from_samples(const GridSamples& samples, const ExtractOptions& opts = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    const GridSpec& spec = samples.spec;
    ExtractResult result;
    ExtractStats& st = result.stats;
    st.total_cells = spec.num_cells();

    const std::vector<std::uint64_t> cells = candidate_cells(samples, opts.cull_factor);
    st.candidate_cells = cells.size();
    st.culled_cells = st.total_cells - st.candidate_cells;

    std::vector<std::vector<CellTriangle>> tris(cells.size());
    std::vector<std::uint16_t> cut_mask(cells.size(), 0);
    std::vector<SkipReason> skip(cells.size(), SkipReason::none);
    parallel_for(cells.size(), opts.threads, [&](std::size_t i) {
        const PseudoSignedCell pc = pseudo_sign_cell(samples, cells[i], opts.grad_norm_min);
        skip[i] = pc.skip;
        if (pc.skip != SkipReason::none) return;
        cut_mask[i] = mc::kEdgeTable[static_cast<std::size_t>(pc.case_index())];
        tris[i] = triangulate_cell(pc, spec);
    });

    std::unordered_map<std::uint64_t, std::uint8_t> edge_state;  // bit0: cut somewhere, bit1: uncut somewhere
    for (std::size_t i = 0; i < cells.size(); ++i) {
        switch (skip[i]) {
            case SkipReason::no_valid_anchor: ++st.skipped_no_anchor; break;
            case SkipReason::no_crossing: ++st.skipped_no_crossing; break;
            default: break;
        }
        if (skip[i] == SkipReason::none && !tris[i].empty()) ++st.triangulated_cells;
        if (cut_mask[i] == 0) continue;
        const auto keys = detail::cell_edge_keys(spec, cells[i]);
        for (int e = 0; e < 12; ++e)
            if (cut_mask[i] & (1 << e)) edge_state[keys[static_cast<std::size_t>(e)]] |= 1;
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (skip[i] == SkipReason::no_valid_anchor) continue;
        const auto keys = detail::cell_edge_keys(spec, cells[i]);
        for (int e = 0; e < 12; ++e) {
            if (cut_mask[i] & (1 << e)) continue;
            auto it = edge_state.find(keys[static_cast<std::size_t>(e)]);
            if (it != edge_state.end()) it->second |= 2;
        }
    }
    for (const auto& [key, state] : edge_state)
        if (state == 3) ++st.inconsistent_edges;

    result.mesh = weld_vertices(tris);
    st.extract_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

/// Samples the field on the lattice and runs pseudo-signed extraction.
inline ExtractResult extract_mesh(const UdfField& field, const GridSpec& spec, const ExtractOptions& opts = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    const GridSamples samples = sample_grid(field, spec, opts.threads);
    const double sample_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ExtractResult r = extract_from_samples(samples, opts);
    r.stats.sample_seconds = sample_seconds;
    return r;
}

}  // namespace udfmc
