#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "field.hpp"
#include "grid.hpp"
#include "mesh.hpp"
#include "parallel.hpp"

namespace udfmc {

/// Deletes every face with a vertex where the field exceeds `tol`, then drops
/// orphaned vertices. Facets created between nearby sheets or past open
/// borders have vertices well off the zero set and are caught by this test.
inline TriMesh remove_spurious_facets(const TriMesh& mesh, const UdfField& field, double tol, unsigned threads = 0) {
    if (!(tol > 0.0)) throw std::invalid_argument("remove_spurious_facets: tol must be positive");
    std::vector<char> far(mesh.vertices.size(), 0);
    parallel_for(mesh.vertices.size(), threads,
                 [&](std::size_t i) { far[i] = field.eval(mesh.vertices[i]) > tol ? 1 : 0; });
    TriMesh kept;
    kept.vertices = mesh.vertices;
    kept.vertex_edge_ids = mesh.vertex_edge_ids;
    for (const auto& f : mesh.faces)
        if (!far[f[0]] && !far[f[1]] && !far[f[2]]) kept.faces.push_back(f);
    return compact(kept);
}

/// True when both endpoints lie on the same face of `box`, i.e. the edge runs
/// along the boundary of the sampled region.
inline bool edge_on_box_face(const Point3& a, const Point3& b, const Aabb& box) {
    const double tol = 1e-9 * std::max(1.0, box.diagonal());
    for (int ax = 0; ax < 3; ++ax) {
        if (std::abs(a[ax] - box.min[ax]) <= tol && std::abs(b[ax] - box.min[ax]) <= tol) return true;
        if (std::abs(a[ax] - box.max[ax]) <= tol && std::abs(b[ax] - box.max[ax]) <= tol) return true;
    }
    return false;
}

/// Neighbours of each vertex along border edges. Edges on a face of `domain`
/// are where the lattice ends rather than where the surface ends, and are ignored.
inline std::vector<std::vector<std::uint32_t>> border_neighbors(const TriMesh& mesh,
                                                                const std::optional<Aabb>& domain = std::nullopt) {
    std::vector<std::vector<std::uint32_t>> nb(mesh.vertices.size());
    for (const auto& be : border_edges(mesh)) {
        if (domain && edge_on_box_face(mesh.vertices[be.edge.a], mesh.vertices[be.edge.b], *domain)) continue;
        nb[be.edge.a].push_back(be.edge.b);
        nb[be.edge.b].push_back(be.edge.a);
    }
    return nb;
}

/// Curve-Laplacian smoothing restricted to border polylines. Each step moves
/// every border vertex with exactly two border neighbours by
/// weight * (mean(neighbours) - v), using positions from the previous step.
/// Junction vertices (three or more border edges) and border endpoints stay fixed.
/// Edges on a face of `domain` are not treated as border edges.
inline TriMesh smooth_borders(const TriMesh& mesh, int steps = 5, double weight = 0.5,
                              const std::optional<Aabb>& domain = std::nullopt) {
    TriMesh out = mesh;
    if (steps <= 0) return out;
    const auto nb = border_neighbors(mesh, domain);
    std::vector<std::uint32_t> movable;
    for (std::uint32_t v = 0; v < nb.size(); ++v)
        if (nb[v].size() == 2) movable.push_back(v);
    if (movable.empty()) return out;
    std::vector<Point3> next;
    for (int s = 0; s < steps; ++s) {
        next = out.vertices;
        for (auto v : movable) {
            const Point3 mean = (out.vertices[nb[v][0]] + out.vertices[nb[v][1]]) * 0.5;
            next[v] = out.vertices[v] + weight * (mean - out.vertices[v]);
        }
        out.vertices.swap(next);
    }
    return out;
}

struct PostprocessOptions {
    bool prune = true;
    /// Defaults to half the cell diagonal of the extraction grid.
    std::optional<double> prune_tol;
    bool smooth = true;
    int smooth_steps = 5;
    double smooth_weight = 0.5;
};

/// Facet removal followed by border smoothing (removal creates new borders).
inline TriMesh postprocess(const TriMesh& mesh, const UdfField& field, const GridSpec& spec,
                           const PostprocessOptions& opts = {}, unsigned threads = 0) {
    TriMesh out = mesh;
    if (opts.prune) out = remove_spurious_facets(out, field, opts.prune_tol.value_or(0.5 * spec.cell_diagonal()), threads);
    if (opts.smooth)
        out = smooth_borders(out, opts.smooth_steps, opts.smooth_weight, Aabb{spec.bounds_min, spec.bounds_max});
    return out;
}

}  // namespace udfmc
