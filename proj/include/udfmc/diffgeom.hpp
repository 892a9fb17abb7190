#pragma once

// Derivatives of extracted vertex positions with respect to field parameters.
//
// Interior vertices move along the surface normal n. Probing the field at
// v_+ = v + alpha n and v_- = v - alpha n, each side alone determines the motion
// of v: a unit increase of u_+ moves v by -n, a unit increase of u_- moves it
// by +n. Border vertices move along the in-plane outward direction o, driven by
// u_o at v + alpha o (a unit increase of u_o moves v by -o).

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "field.hpp"
#include "mesh.hpp"
#include "parallel.hpp"
#include "postprocess.hpp"

namespace udfmc {

enum class VertexKind : std::uint8_t { interior, border };

/// Rank-one per-vertex Jacobian: dv/dc = direction (x) row, stored as a unit
/// direction and a row of param_dim scalars per vertex.
struct VertexJacobian {
    std::size_t param_dim = 0;
    double alpha = 1e-2;
    std::vector<VertexKind> kind;
    std::vector<Vec3> direction;
    std::vector<double> rows;  // num_vertices x param_dim, row-major
    std::size_t ambiguous_border_vertices = 0;

    std::size_t num_vertices() const { return kind.size(); }
    std::span<const double> row(std::size_t v) const { return {rows.data() + v * param_dim, param_dim}; }

    /// Predicted displacement of vertex v for a parameter change delta.
    Vec3 displacement(std::size_t v, std::span<const double> delta) const {
        const auto r = row(v);
        double s = 0.0;
        for (std::size_t k = 0; k < param_dim; ++k) s += r[k] * delta[k];
        return direction[v] * s;
    }

    /// Full 3 x C block for vertex v (column-major per parameter: entry [k] is dv/dc_k).
    std::vector<Vec3> block(std::size_t v) const {
        std::vector<Vec3> out(param_dim);
        const auto r = row(v);
        for (std::size_t k = 0; k < param_dim; ++k) out[k] = direction[v] * r[k];
        return out;
    }
};

/// Faces incident to each vertex, in face order.
inline std::vector<std::vector<std::uint32_t>> vertex_faces(const TriMesh& mesh) {
    std::vector<std::vector<std::uint32_t>> vf(mesh.vertices.size());
    for (std::uint32_t f = 0; f < mesh.faces.size(); ++f)
        for (auto v : mesh.faces[f]) vf[v].push_back(f);
    return vf;
}

/// Area-weighted unsigned vertex normal. Face normals are flipped to agree with
/// the running sum before being added, since face orientation is not globally
/// consistent. Falls back to the first face normal if the sum cancels.
inline Vec3 vertex_normal(const TriMesh& mesh, std::span<const std::uint32_t> incident) {
    if (incident.empty()) throw std::invalid_argument("vertex_normal: vertex has no incident face");
    Vec3 sum;
    for (auto f : incident) {
        Vec3 w = face_cross(mesh, mesh.faces[f]);
        if (dot(sum, w) < 0.0) w = -w;
        sum += w;
    }
    const Vec3 n = normalized(sum);
    if (norm(n) > 0.0) return n;
    return face_normal(mesh, mesh.faces[incident.front()]);
}

inline Vec3 vertex_normal(const TriMesh& mesh, std::uint32_t v) {
    const auto vf = vertex_faces(mesh);
    return vertex_normal(mesh, vf.at(v));
}

/// Outward in-plane direction at a border vertex: o = w (n x e)/|n x e| with the
/// sign w in {-1, +1} picking the larger field value at v + w alpha (n x e)/|n x e|
/// (ties keep +1). Returns nullopt when n x e is degenerate.
inline std::optional<Vec3> outward_vector(const UdfField& field, const Point3& v, const Vec3& face_n,
                                          const Vec3& edge, double alpha) {
    const Vec3 c = cross(face_n, edge);
    const double len = norm(c);
    if (len < 1e-9) return std::nullopt;
    const Vec3 dir = c / len;
    const double plus = field.eval(v + alpha * dir);
    const double minus = field.eval(v - alpha * dir);
    return minus > plus ? -dir : dir;
}

/// Weighted difference of one-sided sensitivities for an interior vertex:
/// scale * [dphi/dc(v - alpha n) - dphi/dc(v + alpha n)], paired with direction n.
/// With scale = 1 this is the plain sum of the two one-sided contributions; the
/// default 0.5 averages them, which reproduces the motion of the zero set for
/// exact distance fields (see JacobianOptions::interior_scale).
inline std::vector<double> interior_vertex_derivative(const UdfField& field, const Point3& v, const Vec3& n,
                                                      double alpha, double scale = 0.5) {
    const auto minus = field.param_sensitivity(v - alpha * n);
    const auto plus = field.param_sensitivity(v + alpha * n);
    std::vector<double> row(minus.size());
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = scale * (minus[k] - plus[k]);
    return row;
}

/// -dphi/dc(v + alpha o), paired with direction o.
inline std::vector<double> border_vertex_derivative(const UdfField& field, const Point3& v, const Vec3& o,
                                                    double alpha) {
    auto row = field.param_sensitivity(v + alpha * o);
    for (auto& r : row) r = -r;
    return row;
}

struct JacobianOptions {
    double alpha = 1e-2;
    /// When false every vertex uses the interior formula.
    bool border_grads = true;
    /// Weight on the interior two-sided difference. Each side on its own already
    /// accounts for the full motion of v, so summing both double-counts it for a
    /// true distance field; 0.5 averages them. Set 1.0 for the unaveraged sum.
    double interior_scale = 0.5;
    /// Region the mesh was extracted from. Border edges lying on one face of
    /// this box are where the lattice ends, not where the surface ends; their
    /// vertices are treated as interior.
    std::optional<Aabb> domain;
    unsigned threads = 0;
};

/// Per-vertex derivative rows for a mesh extracted from `field`.
inline VertexJacobian assemble_jacobian(const TriMesh& mesh, const UdfField& field, const JacobianOptions& opts = {}) {
    VertexJacobian J;
    J.param_dim = field.param_dim();
    J.alpha = opts.alpha;
    const std::size_t nv = mesh.vertices.size();
    J.kind.assign(nv, VertexKind::interior);
    J.direction.assign(nv, Vec3{});
    J.rows.assign(nv * J.param_dim, 0.0);

    const auto vf = vertex_faces(mesh);

    // First incident border edge (in sorted edge order) per vertex.
    std::vector<std::optional<BorderEdge>> first_border(nv);
    std::vector<int> border_degree(nv, 0);
    if (opts.border_grads) {
        for (const auto& be : border_edges(mesh)) {
            const Point3& a = mesh.vertices[be.edge.a];
            const Point3& b = mesh.vertices[be.edge.b];
            if (opts.domain && edge_on_box_face(a, b, *opts.domain)) continue;
            for (auto v : {be.edge.a, be.edge.b}) {
                ++border_degree[v];
                if (!first_border[v]) first_border[v] = be;
            }
        }
    }
    J.ambiguous_border_vertices =
        static_cast<std::size_t>(std::count_if(border_degree.begin(), border_degree.end(), [](int d) { return d > 2; }));

    parallel_for(nv, opts.threads, [&](std::size_t v) {
        if (vf[v].empty()) return;
        const Point3& p = mesh.vertices[v];
        std::vector<double> row;
        if (first_border[v]) {
            const BorderEdge& be = *first_border[v];
            const Vec3 e = mesh.vertices[be.edge.b] - mesh.vertices[be.edge.a];
            const Vec3 fn = face_normal(mesh, mesh.faces[be.face]);
            if (const auto o = outward_vector(field, p, fn, e, opts.alpha)) {
                J.kind[v] = VertexKind::border;
                J.direction[v] = *o;
                row = border_vertex_derivative(field, p, *o, opts.alpha);
            }
        }
        if (J.kind[v] == VertexKind::interior) {
            const Vec3 n = vertex_normal(mesh, vf[v]);
            J.direction[v] = n;
            row = interior_vertex_derivative(field, p, n, opts.alpha, opts.interior_scale);
        }
        std::copy(row.begin(), row.end(), J.rows.begin() + static_cast<std::ptrdiff_t>(v * J.param_dim));
    });
    return J;
}

}  // namespace udfmc
