#pragma once

// Directional finite-difference check of the vertex Jacobian.
//
// For each parameter direction delta and step eps the field is perturbed to
// c + eps delta and the mesh re-extracted. Interior vertices are matched by the
// lattice edge they were interpolated on and their displacement is projected
// onto n. Border vertices do not move continuously under re-extraction (the
// mesh border is quantized to the lattice), so their motion is measured on the
// field itself: the alpha-level crossing along the ray v + s o is located before
// and after the perturbation, and the shift of s is compared with the
// predicted displacement along o.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "diffgeom.hpp"
#include "extract.hpp"
#include "field.hpp"
#include "grid.hpp"
#include "postprocess.hpp"

namespace udfmc {

struct GradcheckOptions {
    GridSpec grid;
    ExtractOptions extract;
    PostprocessOptions post;
    JacobianOptions jacobian;
    std::vector<double> epsilons{1e-3, 1e-4};
    /// Explicit directions (each of length param_dim). When empty, one unit
    /// direction per finite parameter is used.
    std::vector<std::vector<double>> directions;
    /// Extra random unit directions over the finite parameters.
    int random_directions = 0;
    std::uint64_t seed = 0;
    double rel_tol = 0.1;
    double abs_tol = 1e-4;
    /// Interior vertices are compared only where |n . edge axis| reaches this
    /// value; on grazing edges linear interpolation misrepresents normal motion.
    double min_alignment = 0.5;
    /// Interior vertices farther than this fraction of alpha from the zero set
    /// are not on the surface and are not compared. Border vertices are
    /// compared only if their probe point v + alpha o is at least this far off
    /// the surface, i.e. v is not buried inside the sheet.
    double on_surface_fraction = 0.1;
};

struct GradcheckEntry {
    double eps = 0.0;
    std::size_t direction = 0;
    std::uint32_t vertex = 0;
    VertexKind kind = VertexKind::interior;
    Point3 position;
    double predicted = 0.0;
    double actual = 0.0;
    double error = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

struct GradcheckReport {
    std::vector<GradcheckEntry> entries;
    std::size_t param_dim = 0;
    std::size_t mesh_vertices = 0;
    std::size_t skipped_unmatched = 0;
    std::size_t skipped_alignment = 0;
    std::size_t skipped_off_surface = 0;
    std::size_t skipped_no_crossing = 0;
    bool pass = true;
    std::string message;

    std::optional<GradcheckEntry> worst() const {
        std::optional<GradcheckEntry> w;
        double worst_ratio = -1.0;
        for (const auto& e : entries) {
            const double r = e.error / e.tolerance;
            if (r > worst_ratio) {
                worst_ratio = r;
                w = e;
            }
        }
        return w;
    }
};

/// Signed offset s of the nearest crossing where phi(x0 + s dir) rises through
/// `level`, searched on [-reach, reach]; `near` selects among several crossings.
inline std::optional<double> level_crossing(const UdfField& field, const Point3& x0, const Vec3& dir, double level,
                                            double reach, double near = 0.0, int samples = 512) {
    auto g = [&](double s) { return field.eval(x0 + s * dir) - level; };
    std::optional<double> best;
    double prev_s = -reach, prev_g = g(prev_s);
    for (int i = 1; i <= samples; ++i) {
        const double s = -reach + 2.0 * reach * i / samples;
        const double gs = g(s);
        if (prev_g < 0.0 && gs >= 0.0) {
            double lo = prev_s, hi = s;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                (g(mid) < 0.0 ? lo : hi) = mid;
            }
            const double root = 0.5 * (lo + hi);
            if (!best || std::abs(root - near) < std::abs(*best - near)) best = root;
        }
        prev_s = s;
        prev_g = gs;
    }
    return best;
}

inline GradcheckReport gradcheck(const UdfField& field, const GradcheckOptions& opts) {
    GradcheckReport rep;
    const std::size_t C = field.param_dim();
    rep.param_dim = C;
    if (C == 0) {
        rep.message = "field has no parameters; nothing to check";
        return rep;
    }
    const std::vector<double> c0 = field.params();

    std::vector<std::vector<double>> dirs = opts.directions;
    for (const auto& d : dirs)
        if (d.size() != C) throw std::invalid_argument("gradcheck: direction length differs from param_dim");
    if (dirs.empty())
        for (std::size_t k = 0; k < C; ++k)
            if (std::isfinite(c0[k])) {
                std::vector<double> d(C, 0.0);
                d[k] = 1.0;
                dirs.push_back(d);
            }
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < opts.random_directions; ++r) {
        std::vector<double> d(C, 0.0);
        double n2 = 0.0;
        for (std::size_t k = 0; k < C; ++k)
            if (std::isfinite(c0[k])) {
                d[k] = gauss(rng);
                n2 += d[k] * d[k];
            }
        if (n2 == 0.0) continue;
        for (auto& x : d) x /= std::sqrt(n2);
        dirs.push_back(d);
    }

    JacobianOptions jopts = opts.jacobian;
    if (!jopts.domain) jopts.domain = Aabb{opts.grid.bounds_min, opts.grid.bounds_max};
    auto extract = [&](const UdfField& f) {
        return postprocess(extract_mesh(f, opts.grid, opts.extract).mesh, f, opts.grid, opts.post,
                           opts.extract.threads);
    };
    const TriMesh mesh0 = extract(field);
    rep.mesh_vertices = mesh0.vertices.size();
    if (mesh0.empty()) {
        rep.pass = false;
        rep.message = "unperturbed field produced an empty mesh";
        return rep;
    }
    const VertexJacobian J = assemble_jacobian(mesh0, field, jopts);
    const double alpha = jopts.alpha;
    const double reach = 2.0 * opts.grid.cell_diagonal() + alpha;
    const std::uint64_t edge_keys = 3 * opts.grid.num_corners();

    // Per-vertex gating and border crossings on the unperturbed field.
    std::vector<char> check(mesh0.vertices.size(), 0);
    std::vector<double> s0(mesh0.vertices.size(), 0.0);
    for (std::uint32_t v = 0; v < mesh0.vertices.size(); ++v) {
        const Point3& p = mesh0.vertices[v];
        if (J.kind[v] == VertexKind::border) {
            if (field.eval(p + alpha * J.direction[v]) < opts.on_surface_fraction * alpha) {
                ++rep.skipped_off_surface;
                continue;
            }
            const auto s = level_crossing(field, p, J.direction[v], alpha, reach);
            if (!s) {
                ++rep.skipped_no_crossing;
                continue;
            }
            s0[v] = *s;
            check[v] = 1;
            continue;
        }
        const std::uint64_t key = mesh0.vertex_edge_ids[v];
        if (key >= edge_keys) {
            ++rep.skipped_alignment;
            continue;
        }
        const int axis = static_cast<int>(key % 3);
        if (std::abs(J.direction[v][axis]) < opts.min_alignment) {
            ++rep.skipped_alignment;
            continue;
        }
        if (field.eval(p) > opts.on_surface_fraction * alpha) {
            ++rep.skipped_off_surface;
            continue;
        }
        check[v] = 1;
    }

    for (const double eps : opts.epsilons) {
        for (std::size_t di = 0; di < dirs.size(); ++di) {
            std::vector<double> c = c0, delta(C);
            for (std::size_t k = 0; k < C; ++k) {
                delta[k] = eps * dirs[di][k];
                if (std::isfinite(c[k])) c[k] += delta[k];
            }
            const auto f1 = field.with_params(c);
            const TriMesh mesh1 = extract(*f1);
            std::unordered_map<std::uint64_t, std::uint32_t> by_key;
            for (std::uint32_t v = 0; v < mesh1.vertices.size(); ++v) by_key.emplace(mesh1.vertex_edge_ids[v], v);

            for (std::uint32_t v = 0; v < mesh0.vertices.size(); ++v) {
                if (!check[v]) continue;
                GradcheckEntry e;
                e.eps = eps;
                e.direction = di;
                e.vertex = v;
                e.kind = J.kind[v];
                e.position = mesh0.vertices[v];
                e.predicted = dot(J.displacement(v, delta), J.direction[v]);
                if (e.kind == VertexKind::border) {
                    const auto s1 = level_crossing(*f1, e.position, J.direction[v], alpha, reach, s0[v]);
                    if (!s1) {
                        ++rep.skipped_no_crossing;
                        continue;
                    }
                    e.actual = *s1 - s0[v];
                } else {
                    const auto it = by_key.find(mesh0.vertex_edge_ids[v]);
                    if (it == by_key.end()) {
                        ++rep.skipped_unmatched;
                        continue;
                    }
                    e.actual = dot(mesh1.vertices[it->second] - e.position, J.direction[v]);
                }
                e.error = std::abs(e.actual - e.predicted);
                e.tolerance = std::max(opts.rel_tol * std::abs(e.predicted), opts.abs_tol);
                e.pass = e.error <= e.tolerance;
                rep.pass = rep.pass && e.pass;
                rep.entries.push_back(e);
            }
        }
    }
    if (rep.entries.empty()) {
        rep.pass = false;
        rep.message = "no vertex could be compared";
    } else if (!rep.pass) {
        const auto w = rep.worst();
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "worst: %s vertex %u at (%.6g, %.6g, %.6g), eps %.3g, direction %zu: predicted %.6g, "
                      "actual %.6g, error %.3e > tolerance %.3e",
                      w->kind == VertexKind::border ? "border" : "interior", w->vertex, w->position.x,
                      w->position.y, w->position.z, w->eps, w->direction, w->predicted, w->actual, w->error,
                      w->tolerance);
        rep.message = buf;
    }
    return rep;
}

inline void write_gradcheck_csv(const GradcheckReport& rep, std::ostream& out) {
    out << "eps,direction,vertex,kind,x,y,z,predicted,actual,abs_error,tolerance,pass\n";
    char buf[320];
    for (const auto& e : rep.entries) {
        std::snprintf(buf, sizeof buf, "%.3g,%zu,%u,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.3e,%.3e,%d\n", e.eps, e.direction,
                      e.vertex, e.kind == VertexKind::border ? "border" : "interior", e.position.x, e.position.y,
                      e.position.z, e.predicted, e.actual, e.error, e.tolerance, e.pass ? 1 : 0);
        out << buf;
    }
}

}  // namespace udfmc
