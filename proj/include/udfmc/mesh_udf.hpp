#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>

#include "bvh.hpp"
#include "field.hpp"
#include "mesh.hpp"

namespace udfmc {

/// Exact unsigned distance to a reference triangle mesh, optionally clamped at
/// d_max. Beyond the clamp the field is flat and its gradient is zero.
class MeshUdf final : public UdfField {
public:
    explicit MeshUdf(const TriMesh& mesh, std::optional<double> d_max = std::nullopt)
        : bvh_(std::make_shared<const TriangleBvh>(mesh)), d_max_(d_max) {
        if (mesh.faces.empty()) throw std::invalid_argument("MeshUdf: reference mesh has no faces");
        if (d_max_ && !(*d_max_ > 0.0)) throw std::invalid_argument("MeshUdf: d_max must be positive");
    }

    std::size_t param_dim() const override { return 0; }

    double eval(const Point3& x) const override { return sample(x).distance; }
    Gradient grad_x(const Point3& x) const override { return sample(x).gradient; }

    FieldSample sample(const Point3& x) const override {
        const ClosestPoint cp = bvh_->closest(x);
        const double d = std::sqrt(cp.squared_distance);
        if (d_max_ && d >= *d_max_) return {*d_max_, {Vec3{}, false}};
        if (d == 0.0) return {0.0, {Vec3{}, true}};
        return {d, {(x - cp.point) / d, false}};
    }

    ClosestPoint closest(const Point3& x) const { return bvh_->closest(x); }

    std::vector<double> param_sensitivity(const Point3&) const override { return {}; }
    std::vector<double> params() const override { return {}; }

    std::unique_ptr<UdfField> with_params(std::span<const double> c) const override {
        detail::check_param_count(0, c.size(), "MeshUdf");
        return std::make_unique<MeshUdf>(*this);
    }

    const TriMesh& reference() const { return bvh_->mesh(); }
    std::optional<double> d_max() const { return d_max_; }

private:
    std::shared_ptr<const TriangleBvh> bvh_;
    std::optional<double> d_max_;
};

}  // namespace udfmc
