#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "vec3.hpp"

namespace udfmc {

struct Neighbor {
    std::uint32_t index = 0;
    double squared_distance = std::numeric_limits<double>::infinity();
};

/// Static 3-d tree over a point set for exact nearest-neighbour queries.
/// Ties in distance resolve to the smaller point index.
class KdTree {
public:
    explicit KdTree(std::span<const Point3> points) : points_(points.begin(), points.end()) {
        order_.resize(points_.size());
        std::iota(order_.begin(), order_.end(), 0u);
        nodes_.reserve(points_.size() / kLeafSize * 2 + 1);
        if (!points_.empty()) build(0, static_cast<std::uint32_t>(order_.size()));
    }

    bool empty() const { return points_.empty(); }
    std::size_t size() const { return points_.size(); }

    Neighbor nearest(const Point3& q) const {
        Neighbor best;
        if (!points_.empty()) search(0, q, best);
        return best;
    }

private:
    static constexpr std::uint32_t kLeafSize = 8;

    struct Node {
        std::uint32_t begin = 0, end = 0;
        std::uint32_t left = 0, right = 0;  // 0 means leaf (the root is never a child)
        int axis = 0;
        double split = 0.0;
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end) {
        const auto id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back({begin, end, 0, 0, 0, 0.0});
        if (end - begin <= kLeafSize) return id;

        Aabb box;
        for (std::uint32_t i = begin; i < end; ++i) box.expand(points_[order_[i]]);
        const Vec3 ext = box.extent();
        const int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
        const std::uint32_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) {
                             const double pa = points_[a][axis], pb = points_[b][axis];
                             return pa < pb || (pa == pb && a < b);
                         });
        const double split = points_[order_[mid]][axis];
        const std::uint32_t l = build(begin, mid);
        const std::uint32_t r = build(mid, end);
        nodes_[id].left = l;
        nodes_[id].right = r;
        nodes_[id].axis = axis;
        nodes_[id].split = split;
        return id;
    }

    void search(std::uint32_t id, const Point3& q, Neighbor& best) const {
        const Node& n = nodes_[id];
        if (n.left == 0) {
            for (std::uint32_t i = n.begin; i < n.end; ++i) {
                const std::uint32_t p = order_[i];
                const double d2 = squared_norm(points_[p] - q);
                if (d2 < best.squared_distance || (d2 == best.squared_distance && p < best.index))
                    best = {p, d2};
            }
            return;
        }
        const double diff = q[n.axis] - n.split;
        const std::uint32_t near = diff < 0.0 ? n.left : n.right;
        const std::uint32_t far = diff < 0.0 ? n.right : n.left;
        search(near, q, best);
        // <= so equal-distance points on the far side still get the index tie-break.
        if (diff * diff <= best.squared_distance) search(far, q, best);
    }

    std::vector<Point3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

}  // namespace udfmc
