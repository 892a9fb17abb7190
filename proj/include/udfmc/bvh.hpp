#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "mesh.hpp"
#include "vec3.hpp"

namespace udfmc {

/// Closest point on triangle (a, b, c) to p, by Voronoi-region classification.
inline Point3 closest_point_on_triangle(const Point3& p, const Point3& a, const Point3& b, const Point3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    const Vec3 bp = p - b;
    const double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return a + v * ab;
    }

    const Vec3 cp = p - c;
    const double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return a + w * ac;
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + w * (c - b);
    }

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    return a + ab * v + ac * w;
}

struct ClosestPoint {
    Point3 point;
    double squared_distance = std::numeric_limits<double>::infinity();
    std::uint32_t face = 0;
};

/// Bounding-volume hierarchy over the faces of a triangle mesh for exact
/// closest-point queries. Holds its own copy of the geometry.
class TriangleBvh {
public:
    TriangleBvh() = default;

    explicit TriangleBvh(const TriMesh& mesh) : mesh_(mesh) {
        validate(mesh_);
        if (mesh_.faces.empty()) return;
        order_.resize(mesh_.faces.size());
        std::iota(order_.begin(), order_.end(), 0u);
        centroids_.reserve(mesh_.faces.size());
        for (const auto& f : mesh_.faces)
            centroids_.push_back((mesh_.vertices[f[0]] + mesh_.vertices[f[1]] + mesh_.vertices[f[2]]) / 3.0);
        nodes_.reserve(2 * mesh_.faces.size());
        nodes_.emplace_back();
        fill(0, 0, static_cast<std::uint32_t>(order_.size()));
        centroids_.clear();
        centroids_.shrink_to_fit();
    }

    const TriMesh& mesh() const { return mesh_; }
    bool empty() const { return nodes_.empty(); }

    ClosestPoint closest(const Point3& p) const {
        ClosestPoint best;
        if (nodes_.empty()) return best;
        std::array<std::uint32_t, 128> stack{};
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& node = nodes_[stack[--top]];
            if (node.box.squared_distance(p) >= best.squared_distance) continue;
            if (node.count > 0) {
                for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                    const Face& f = mesh_.faces[order_[i]];
                    const Point3 q =
                        closest_point_on_triangle(p, mesh_.vertices[f[0]], mesh_.vertices[f[1]], mesh_.vertices[f[2]]);
                    const double d2 = squared_norm(p - q);
                    if (d2 < best.squared_distance) best = {q, d2, order_[i]};
                }
                continue;
            }
            // Visit the nearer child first.
            const std::uint32_t l = node.first, r = node.first + 1;
            const double dl = nodes_[l].box.squared_distance(p), dr = nodes_[r].box.squared_distance(p);
            if (dl <= dr) {
                stack[top++] = r;
                stack[top++] = l;
            } else {
                stack[top++] = l;
                stack[top++] = r;
            }
        }
        return best;
    }

private:
    struct Node {
        Aabb box;
        std::uint32_t first = 0;  // first face slot for leaves, left child index otherwise
        std::uint32_t count = 0;  // 0 for interior nodes
    };

    static constexpr std::uint32_t kLeafSize = 4;

    void fill(std::uint32_t slot, std::uint32_t begin, std::uint32_t end) {
        Aabb box, cbox;
        for (std::uint32_t i = begin; i < end; ++i) {
            const Face& f = mesh_.faces[order_[i]];
            for (auto v : f) box.expand(mesh_.vertices[v]);
            cbox.expand(centroids_[order_[i]]);
        }
        nodes_[slot].box = box;
        if (end - begin <= kLeafSize) {
            nodes_[slot].first = begin;
            nodes_[slot].count = end - begin;
            return;
        }
        const Vec3 ext = cbox.extent();
        const int axis = (ext.x >= ext.y && ext.x >= ext.z) ? 0 : (ext.y >= ext.z ? 1 : 2);
        const std::uint32_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) { return centroids_[a][axis] < centroids_[b][axis]; });
        // Children are allocated adjacently so the parent stores only the left index.
        const auto left = static_cast<std::uint32_t>(nodes_.size());
        nodes_.emplace_back();
        nodes_.emplace_back();
        fill(left, begin, mid);
        fill(left + 1, mid, end);
        nodes_[slot].first = left;
        nodes_[slot].count = 0;
    }

    TriMesh mesh_;
    std::vector<std::uint32_t> order_;
    std::vector<Point3> centroids_;
    std::vector<Node> nodes_;
};

}  // namespace udfmc
