#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"
#include "grid.hpp"
#include "kdtree.hpp"
#include "marching_cubes.hpp"
#include "mesh.hpp"
#include "parallel.hpp"
#include "raster.hpp"
#include "sampling.hpp"

namespace udfmc {

/// Mean squared distance from each point of `from` to its nearest point in `to`.
inline double mean_squared_nn(std::span<const Point3> from, const KdTree& to, unsigned threads = 0) {
    std::vector<double> d2(from.size());
    parallel_for(from.size(), threads, [&](std::size_t i) { d2[i] = to.nearest(from[i]).squared_distance; });
    double sum = 0.0;
    for (double v : d2) sum += v;
    return sum / static_cast<double>(from.size());
}

/// Symmetric Chamfer distance: sum of the two mean squared nearest-neighbour
/// distances.
inline double chamfer(std::span<const Point3> a, std::span<const Point3> b, unsigned threads = 0) {
    if (a.empty() || b.empty()) throw std::invalid_argument("chamfer: point sets must be non-empty");
    const KdTree ta(a), tb(b);
    return mean_squared_nn(a, tb, threads) + mean_squared_nn(b, ta, threads);
}

/// Mean |cos| between each point's normal and the normal of its nearest
/// neighbour in the other set, averaged over both directions, as a percentage.
inline double normal_consistency(std::span<const Point3> pa, std::span<const Vec3> na, std::span<const Point3> pb,
                                 std::span<const Vec3> nb, unsigned threads = 0) {
    if (pa.empty() || pb.empty()) throw std::invalid_argument("normal_consistency: point sets must be non-empty");
    if (pa.size() != na.size() || pb.size() != nb.size())
        throw std::invalid_argument("normal_consistency: point and normal counts differ");
    auto one_way = [&](std::span<const Point3> p, std::span<const Vec3> n, std::span<const Point3> q,
                       std::span<const Vec3> m) {
        const KdTree tree(q);
        std::vector<double> c(p.size());
        parallel_for(p.size(), threads, [&](std::size_t i) {
            const auto nn = tree.nearest(p[i]);
            c[i] = std::abs(dot(n[i], m[nn.index]));
        });
        double sum = 0.0;
        for (double v : c) sum += v;
        return sum / static_cast<double>(p.size());
    };
    return 50.0 * (one_way(pa, na, pb, nb) + one_way(pb, nb, pa, na));
}

struct ImageConsistencyOptions {
    int resolution = 256;
    double fov_y_deg = 45.0;
    double box_scale = 1.5;
    /// Each half-extent of the camera cuboid is at least this fraction of the
    /// largest one, so flat inputs still get cameras off their plane.
    double min_extent_ratio = 0.25;
};

struct ViewScore {
    bool skipped = false;
    double iou = 0.0;
    double cos = 0.0;
    std::size_t union_pixels = 0;
    std::size_t co_covered_pixels = 0;
};

struct ImageConsistency {
    double ic = 0.0;  // percentage over non-skipped views
    std::vector<ViewScore> views;
    std::vector<std::string> warnings;
};

/// The eight cameras at the corners of the (scaled) joint bounding box of both
/// meshes, all looking at its centre.
inline std::vector<Camera> cuboid_cameras(const TriMesh& a, const TriMesh& b, const ImageConsistencyOptions& opts) {
    Aabb box = bounds(a);
    box.expand(bounds(b));
    const Point3 c = box.center();
    Vec3 h = box.extent() * 0.5;
    const double hmax = std::max({h.x, h.y, h.z});
    if (!(hmax > 0.0)) throw std::invalid_argument("image_consistency: meshes have zero extent");
    for (int ax = 0; ax < 3; ++ax) h[ax] = std::max(h[ax], opts.min_extent_ratio * hmax);
    std::vector<Camera> cams;
    for (int k = 0; k < 8; ++k) {
        const Vec3 s{k & 1 ? 1.0 : -1.0, k & 2 ? 1.0 : -1.0, k & 4 ? 1.0 : -1.0};
        Camera cam;
        cam.eye = c + opts.box_scale * Vec3{s.x * h.x, s.y * h.y, s.z * h.z};
        cam.target = c;
        cam.fov_y_deg = opts.fov_y_deg;
        cam.width = cam.height = opts.resolution;
        cams.push_back(cam);
    }
    return cams;
}

/// Per view: IoU of the silhouettes times the mean cosine between normal maps
/// over pixels covered in both; views with an empty union are skipped.
inline ImageConsistency image_consistency(const TriMesh& pred, const TriMesh& gt,
                                          const ImageConsistencyOptions& opts = {}, unsigned threads = 0) {
    if (pred.empty() || gt.empty()) throw std::invalid_argument("image_consistency: meshes must be non-empty");
    const auto cams = cuboid_cameras(pred, gt, opts);
    ImageConsistency out;
    out.views.resize(cams.size());
    parallel_for(cams.size(), threads, [&](std::size_t k) {
        const NormalMap a = render_normals(pred, cams[k]);
        const NormalMap b = render_normals(gt, cams[k]);
        ViewScore& v = out.views[k];
        std::size_t inter = 0, uni = 0;
        double cos_sum = 0.0;
        for (std::size_t i = 0; i < a.mask.size(); ++i) {
            if (a.mask[i] || b.mask[i]) ++uni;
            if (a.mask[i] && b.mask[i]) {
                ++inter;
                cos_sum += dot(a.normal[i], b.normal[i]);
            }
        }
        v.union_pixels = uni;
        v.co_covered_pixels = inter;
        if (uni == 0) {
            v.skipped = true;
            return;
        }
        v.iou = static_cast<double>(inter) / static_cast<double>(uni);
        v.cos = inter > 0 ? cos_sum / static_cast<double>(inter) : 0.0;
    });
    double sum = 0.0;
    int used = 0;
    for (std::size_t k = 0; k < out.views.size(); ++k) {
        if (out.views[k].skipped) {
            out.warnings.push_back("view " + std::to_string(k) + " skipped: empty silhouette union");
            continue;
        }
        sum += out.views[k].iou * out.views[k].cos;
        ++used;
    }
    out.ic = used > 0 ? 100.0 * sum / used : 0.0;
    return out;
}

/// Baseline: standard marching cubes on the eps-isolevel of the field, giving
/// a closed shell around open surfaces.
inline TriMesh inflate_mesh(const UdfField& field, const GridSpec& spec, double eps, unsigned threads = 0) {
    if (!(eps > 0.0)) throw std::invalid_argument("inflate_mesh: eps must be positive");
    spec.validate();
    std::vector<double> u(spec.num_corners());
    const std::uint32_t res = spec.resolution;
    parallel_for(res, threads, [&](std::size_t k) {
        for (std::uint32_t j = 0; j < res; ++j)
            for (std::uint32_t i = 0; i < res; ++i)
                u[spec.corner_index(i, j, static_cast<std::uint32_t>(k))] =
                    field.eval(spec.corner_position(i, j, static_cast<std::uint32_t>(k)));
    });
    return marching_cubes(u, spec, eps, threads);
}

inline double default_inflation_eps(const GridSpec& spec) { return 0.55 * spec.max_step(); }

struct MetricsOptions {
    std::size_t samples = 30000;
    std::uint64_t seed = 0;
    bool image_consistency = true;
    ImageConsistencyOptions ic;
    unsigned threads = 0;
};

struct MetricsReport {
    double chd = 0.0;
    double ic = 0.0;
    double nc = 0.0;
    std::vector<ViewScore> views;
    std::vector<std::string> warnings;
    std::map<std::string, double> timing;
};

/// CHD, NC and IC between a predicted and a reference mesh. Both meshes are
/// sampled with the same count; the reference uses seed + 1.
inline MetricsReport evaluate_meshes(const TriMesh& pred, const TriMesh& gt, const MetricsOptions& opts = {}) {
    using clock = std::chrono::steady_clock;
    auto secs = [](clock::time_point t) { return std::chrono::duration<double>(clock::now() - t).count(); };
    MetricsReport r;
    auto t = clock::now();
    const auto sa = sample_surface(pred, opts.samples, opts.seed);
    const auto sb = sample_surface(gt, opts.samples, opts.seed + 1);
    std::vector<Point3> pa = sample_points(sa), pb = sample_points(sb);
    std::vector<Vec3> na(sa.size()), nb(sb.size());
    for (std::size_t i = 0; i < sa.size(); ++i) na[i] = sa[i].normal;
    for (std::size_t i = 0; i < sb.size(); ++i) nb[i] = sb[i].normal;
    r.timing["sampling"] = secs(t);

    t = clock::now();
    r.chd = chamfer(pa, pb, opts.threads);
    r.timing["chamfer"] = secs(t);

    t = clock::now();
    r.nc = normal_consistency(pa, na, pb, nb, opts.threads);
    r.timing["normal_consistency"] = secs(t);

    if (opts.image_consistency) {
        t = clock::now();
        auto ic = image_consistency(pred, gt, opts.ic, opts.threads);
        r.ic = ic.ic;
        r.views = std::move(ic.views);
        r.warnings = std::move(ic.warnings);
        r.timing["image_consistency"] = secs(t);
    }
    return r;
}

}  // namespace udfmc
