#pragma once

// Point-cloud fitting through the mesh: extract, sample, measure the one-sided
// Chamfer loss from target points to surface samples, and push its gradient
// back through barycentric weights and the vertex Jacobian.

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "diffgeom.hpp"
#include "extract.hpp"
#include "field.hpp"
#include "grid.hpp"
#include "kdtree.hpp"
#include "postprocess.hpp"
#include "sampling.hpp"

namespace udfmc {

struct FitOptions {
    int iters = 100;
    double lr = 1e-2;
    /// Multiplies the learning rate after every iteration.
    double lr_decay = 1.0;
    bool adam = false;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    /// Weight of the squared parameter norm added to the loss.
    double reg_weight = 0.0;
    std::size_t samples = 10000;
    std::uint64_t seed = 0;
    /// Parameters to optimize; empty means all. Others stay at their start value.
    std::vector<bool> free_params;
    GridSpec grid;
    ExtractOptions extract;
    PostprocessOptions post;
    JacobianOptions jacobian;
};

struct FitIteration {
    int iter = 0;
    double chamfer = 0.0;
    double reg = 0.0;
    double total = 0.0;
    std::vector<double> params;
    std::vector<double> gradient;
    bool skipped = false;
};

struct FitResult {
    std::vector<double> params;
    std::vector<FitIteration> trace;
    std::vector<std::string> events;
};

/// One-sided Chamfer loss (1/|P|) sum_p min_a |a - p| and its gradient with
/// respect to the mesh vertices, for a fixed set of surface samples.
struct SampleLoss {
    double loss = 0.0;
    std::vector<Vec3> vertex_grad;
};

inline SampleLoss point_to_sample_loss(const TriMesh& mesh, const std::vector<SurfaceSample>& samples,
                                       std::span<const Point3> target) {
    SampleLoss out;
    out.vertex_grad.assign(mesh.vertices.size(), Vec3{});
    const auto pts = sample_points(samples);
    const KdTree tree(pts);
    const double inv = 1.0 / static_cast<double>(target.size());
    for (const Point3& p : target) {
        const auto nn = tree.nearest(p);
        const double d = std::sqrt(nn.squared_distance);
        out.loss += d * inv;
        if (d == 0.0) continue;
        const SurfaceSample& s = samples[nn.index];
        const Vec3 g = (s.point - p) * (inv / d);
        const Face& f = mesh.faces[s.face];
        for (int k = 0; k < 3; ++k) out.vertex_grad[f[k]] += s.bary[k] * g;
    }
    return out;
}

/// dL/dc from per-vertex dL/dv through the rank-one Jacobian rows.
inline std::vector<double> param_gradient(const VertexJacobian& J, const std::vector<Vec3>& vertex_grad) {
    std::vector<double> g(J.param_dim, 0.0);
    for (std::size_t v = 0; v < J.num_vertices(); ++v) {
        const double s = dot(vertex_grad[v], J.direction[v]);
        if (s == 0.0) continue;
        const auto r = J.row(v);
        for (std::size_t k = 0; k < J.param_dim; ++k) g[k] += s * r[k];
    }
    return g;
}

/// Fits the parameters of `field` to a target point cloud. `on_iter` is called
/// after each iteration with the loss at the parameters used in that iteration.
inline FitResult fit_point_cloud(const UdfField& field, std::span<const Point3> target, const FitOptions& opts,
                                 const std::function<void(const FitIteration&)>& on_iter = {}) {
    if (target.empty()) throw std::invalid_argument("fit_point_cloud: target point set is empty");
    const std::size_t C = field.param_dim();
    if (!opts.free_params.empty() && opts.free_params.size() != C)
        throw std::invalid_argument("fit_point_cloud: free-parameter mask has wrong length");

    FitResult res;
    std::vector<double> c = field.params();
    std::vector<double> m(C, 0.0), v(C, 0.0);
    double lr = opts.lr;
    JacobianOptions jopts = opts.jacobian;
    if (!jopts.domain) jopts.domain = Aabb{opts.grid.bounds_min, opts.grid.bounds_max};

    auto is_free = [&](std::size_t k) { return opts.free_params.empty() || opts.free_params[k]; };

    for (int it = 0; it < opts.iters; ++it) {
        FitIteration rec;
        rec.iter = it;
        rec.params = c;
        const auto fk = field.with_params(c);
        ExtractResult ex = extract_mesh(*fk, opts.grid, opts.extract);
        const TriMesh mesh = postprocess(ex.mesh, *fk, opts.grid, opts.post, opts.extract.threads);

        for (std::size_t k = 0; k < C; ++k)
            if (is_free(k) && std::isfinite(c[k])) rec.reg += opts.reg_weight * c[k] * c[k];

        if (mesh.empty() || surface_area(mesh) == 0.0) {
            rec.skipped = true;
            rec.chamfer = std::nan("");
            rec.total = std::nan("");
            res.events.push_back("iteration " + std::to_string(it) + ": empty mesh, step skipped");
            res.trace.push_back(rec);
            if (on_iter) on_iter(rec);
            continue;
        }

        const auto samples = sample_surface(mesh, opts.samples, opts.seed + static_cast<std::uint64_t>(it));
        const SampleLoss sl = point_to_sample_loss(mesh, samples, target);
        const VertexJacobian J = assemble_jacobian(mesh, *fk, jopts);
        std::vector<double> g = param_gradient(J, sl.vertex_grad);
        for (std::size_t k = 0; k < C; ++k) {
            if (!is_free(k) || !std::isfinite(c[k])) {
                g[k] = 0.0;
                continue;
            }
            g[k] += 2.0 * opts.reg_weight * c[k];
        }
        rec.chamfer = sl.loss;
        rec.total = sl.loss + rec.reg;
        rec.gradient = g;

        for (std::size_t k = 0; k < C; ++k) {
            if (g[k] == 0.0 && !opts.adam) continue;
            if (!is_free(k) || !std::isfinite(c[k])) continue;
            if (opts.adam) {
                m[k] = opts.adam_beta1 * m[k] + (1.0 - opts.adam_beta1) * g[k];
                v[k] = opts.adam_beta2 * v[k] + (1.0 - opts.adam_beta2) * g[k] * g[k];
                const double mh = m[k] / (1.0 - std::pow(opts.adam_beta1, it + 1));
                const double vh = v[k] / (1.0 - std::pow(opts.adam_beta2, it + 1));
                c[k] -= lr * mh / (std::sqrt(vh) + opts.adam_eps);
            } else {
                c[k] -= lr * g[k];
            }
        }
        lr *= opts.lr_decay;
        res.trace.push_back(rec);
        if (on_iter) on_iter(rec);
    }
    res.params = c;
    return res;
}

}  // namespace udfmc
