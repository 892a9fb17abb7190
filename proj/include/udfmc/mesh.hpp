#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vec3.hpp"

namespace udfmc {

using Face = std::array<std::uint32_t, 3>;

/// Indexed triangle mesh. `vertex_edge_ids` is filled by grid extraction with the
/// lattice edge each vertex was interpolated on, and is empty otherwise.
struct TriMesh {
    std::vector<Point3> vertices;
    std::vector<Face> faces;
    std::vector<std::uint64_t> vertex_edge_ids;

    bool empty() const { return faces.empty(); }
    std::size_t num_vertices() const { return vertices.size(); }
    std::size_t num_faces() const { return faces.size(); }
    bool has_edge_ids() const { return vertex_edge_ids.size() == vertices.size() && !vertices.empty(); }
};

/// Undirected edge with a < b.
struct Edge {
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(std::uint32_t u, std::uint32_t v) { return u < v ? Edge{u, v} : Edge{v, u}; }

/// A border edge and the single face it belongs to.
struct BorderEdge {
    Edge edge;
    std::uint32_t face = 0;
};

inline Vec3 face_cross(const TriMesh& m, const Face& f) {
    const Point3& a = m.vertices[f[0]];
    return cross(m.vertices[f[1]] - a, m.vertices[f[2]] - a);
}

inline double face_area(const TriMesh& m, const Face& f) { return 0.5 * norm(face_cross(m, f)); }

inline Vec3 face_normal(const TriMesh& m, const Face& f) { return normalized(face_cross(m, f)); }

inline double surface_area(const TriMesh& m) {
    double a = 0.0;
    for (const auto& f : m.faces) a += face_area(m, f);
    return a;
}

inline Aabb bounds(const TriMesh& m) {
    Aabb b;
    for (const auto& v : m.vertices) b.expand(v);
    return b;
}

/// Number of incident faces per undirected edge, in sorted edge order.
inline std::map<Edge, std::vector<std::uint32_t>> edge_faces(const TriMesh& m) {
    std::map<Edge, std::vector<std::uint32_t>> out;
    for (std::uint32_t fi = 0; fi < m.faces.size(); ++fi) {
        const Face& f = m.faces[fi];
        for (int k = 0; k < 3; ++k) out[make_edge(f[k], f[(k + 1) % 3])].push_back(fi);
    }
    return out;
}

/// Edges incident to exactly one face, sorted by (a, b).
inline std::vector<BorderEdge> border_edges(const TriMesh& m) {
    std::vector<BorderEdge> out;
    for (const auto& [e, fs] : edge_faces(m))
        if (fs.size() == 1) out.push_back({e, fs.front()});
    return out;
}

inline std::size_t count_border_edges(const TriMesh& m) { return border_edges(m).size(); }

inline std::size_t count_nonmanifold_edges(const TriMesh& m) {
    std::size_t n = 0;
    for (const auto& [e, fs] : edge_faces(m))
        if (fs.size() > 2) ++n;
    return n;
}

/// V - E + F over referenced vertices.
inline long euler_characteristic(const TriMesh& m) {
    std::vector<char> used(m.vertices.size(), 0);
    for (const auto& f : m.faces)
        for (auto v : f) used[v] = 1;
    const long v = std::count(used.begin(), used.end(), 1);
    return v - static_cast<long>(edge_faces(m).size()) + static_cast<long>(m.faces.size());
}

/// Drops vertices not referenced by any face and reindexes faces, preserving
/// the relative order of surviving vertices.
inline TriMesh compact(const TriMesh& m) {
    std::vector<std::int64_t> remap(m.vertices.size(), -1);
    for (const auto& f : m.faces)
        for (auto v : f) remap[v] = 0;
    TriMesh out;
    const bool ids = m.has_edge_ids();
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        if (remap[i] < 0) continue;
        remap[i] = static_cast<std::int64_t>(out.vertices.size());
        out.vertices.push_back(m.vertices[i]);
        if (ids) out.vertex_edge_ids.push_back(m.vertex_edge_ids[i]);
    }
    out.faces.reserve(m.faces.size());
    for (const auto& f : m.faces)
        out.faces.push_back({static_cast<std::uint32_t>(remap[f[0]]), static_cast<std::uint32_t>(remap[f[1]]),
                             static_cast<std::uint32_t>(remap[f[2]])});
    return out;
}

/// Throws std::out_of_range if a face references a missing vertex.
inline void validate(const TriMesh& m) {
    for (std::size_t i = 0; i < m.faces.size(); ++i)
        for (auto v : m.faces[i])
            if (v >= m.vertices.size())
                throw std::out_of_range("face " + std::to_string(i) + " references vertex " + std::to_string(v) +
                                        " of " + std::to_string(m.vertices.size()));
}

}  // namespace udfmc
