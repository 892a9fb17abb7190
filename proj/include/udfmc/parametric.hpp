#pragma once

// Analytic field families with closed-form gradients and parameter
// sensitivities. Parameters are exposed in a fixed order per family.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "field.hpp"
#include "mesh_udf.hpp"

namespace udfmc {

namespace detail {

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace detail

/// |n . x - offset| for a fixed unit normal n. Parameters: [offset].
class PlaneUdf final : public UdfField {
public:
    PlaneUdf(const Vec3& normal, double offset) : normal_(normalized(normal)), offset_(offset) {
        if (norm(normal) == 0.0) throw std::invalid_argument("PlaneUdf: zero normal");
    }

    std::size_t param_dim() const override { return 1; }
    double signed_distance(const Point3& x) const { return dot(normal_, x) - offset_; }
    double eval(const Point3& x) const override { return std::abs(signed_distance(x)); }

    Gradient grad_x(const Point3& x) const override {
        const double s = signed_distance(x);
        if (s == 0.0) return {{}, true};
        return {normal_ * detail::sign_of(s), false};
    }

    std::vector<double> param_sensitivity(const Point3& x) const override {
        return {-detail::sign_of(signed_distance(x))};
    }

    std::vector<double> params() const override { return {offset_}; }
    std::unique_ptr<UdfField> with_params(std::span<const double> c) const override {
        detail::check_param_count(1, c.size(), "PlaneUdf");
        return std::make_unique<PlaneUdf>(normal_, c[0]);
    }

    const Vec3& normal() const { return normal_; }

private:
    Vec3 normal_;
    double offset_;
};

/// Axis-aligned rectangle {x_min <= x <= x_max, y_min <= y <= y_max, z = height}.
/// Extents may be infinite, giving half-planes and strips.
/// Parameters: [x_min, x_max, y_min, y_max, height].
class PlanePatchUdf final : public UdfField {
public:
    static constexpr double kInf = std::numeric_limits<double>::infinity();

    PlanePatchUdf(double x_min, double x_max, double y_min, double y_max, double height)
        : c_{x_min, x_max, y_min, y_max, height} {
        if (!(x_min <= x_max) || !(y_min <= y_max)) throw std::invalid_argument("PlanePatchUdf: empty extent");
    }

    std::size_t param_dim() const override { return 5; }

    Point3 closest(const Point3& x) const {
        return {std::clamp(x.x, c_[0], c_[1]), std::clamp(x.y, c_[2], c_[3]), c_[4]};
    }

    double eval(const Point3& x) const override { return distance(x, closest(x)); }

    Gradient grad_x(const Point3& x) const override {
        const Vec3 d = x - closest(x);
        const double n = norm(d);
        if (n == 0.0) return {{}, true};
        return {d / n, false};
    }

    std::vector<double> param_sensitivity(const Point3& x) const override {
        const Vec3 d = x - closest(x);
        const double n = norm(d);
        std::vector<double> out(5, 0.0);
        if (n == 0.0) return out;
        if (x.x < c_[0]) out[0] = -d.x / n;
        if (x.x > c_[1]) out[1] = -d.x / n;
        if (x.y < c_[2]) out[2] = -d.y / n;
        if (x.y > c_[3]) out[3] = -d.y / n;
        out[4] = -d.z / n;
        return out;
    }

    std::vector<double> params() const override { return {c_.begin(), c_.end()}; }
    std::unique_ptr<UdfField> with_params(std::span<const double> c) const override {
        detail::check_param_count(5, c.size(), "PlanePatchUdf");
        return std::make_unique<PlanePatchUdf>(c[0], c[1], c[2], c[3], c[4]);
    }

private:
    std::array<double, 5> c_;
};

/// Half-plane {x <= border, z = height}. Parameters: [border].
class HalfPlaneUdf final : public UdfField {
public:
    HalfPlaneUdf(double border, double height) : border_(border), height_(height) {}

    std::size_t param_dim() const override { return 1; }

    double eval(const Point3& x) const override {
        const double dx = std::max(0.0, x.x - border_);
        return std::hypot(dx, x.z - height_);
    }

    Gradient grad_x(const Point3& x) const override {
        const Vec3 d{std::max(0.0, x.x - border_), 0.0, x.z - height_};
        const double n = norm(d);
        if (n == 0.0) return {{}, true};
        return {d / n, false};
    }

    std::vector<double> param_sensitivity(const Point3& x) const override {
        const double dx = std::max(0.0, x.x - border_);
        const double n = std::hypot(dx, x.z - height_);
        return {n > 0.0 ? -dx / n : 0.0};
    }

    std::vector<double> params() const override { return {border_}; }
    std::unique_ptr<UdfField> with_params(std::span<const double> c) const override {
        detail::check_param_count(1, c.size(), "HalfPlaneUdf");
        return std::make_unique<HalfPlaneUdf>(c[0], height_);
    }

    double height() const { return height_; }

private:
    double border_;
    double height_;
};

/// Open cylinder of radius r about the vertical axis through (cx, cy), spanning
/// z_min <= z <= z_max. Parameters: [radius, z_min, z_max].
class OpenCylinderUdf final : public UdfField {
public:
    OpenCylinderUdf(double cx, double cy, double radius, double z_min, double z_max)
        : cx_(cx), cy_(cy), c_{radius, z_min, z_max} {
        if (!(radius > 0.0) || !(z_min <= z_max)) throw std::invalid_argument("OpenCylinderUdf: bad geometry");
    }

    std::size_t param_dim() const override { return 3; }

    double eval(const Point3& x) const override {
        const auto [dr, dz, radial] = offsets(x);
        return std::sqrt(dr * dr + dz * dz);
    }

    Gradient grad_x(const Point3& x) const override {
        const auto [dr, dz, radial] = offsets(x);
        const double n = std::sqrt(dr * dr + dz * dz);
        if (n == 0.0) return {{}, true};
        return {(radial * dr + Vec3{0, 0, dz}) / n, false};
    }

    std::vector<double> param_sensitivity(const Point3& x) const override {
        const auto [dr, dz, radial] = offsets(x);
        const double n = std::sqrt(dr * dr + dz * dz);
        std::vector<double> out(3, 0.0);
        if (n == 0.0) return out;
        out[0] = -dr / n;
        if (x.z < c_[1]) out[1] = -dz / n;
        if (x.z > c_[2]) out[2] = -dz / n;
        return out;
    }

    std::vector<double> params() const override { return {c_.begin(), c_.end()}; }
    std::unique_ptr<UdfField> with_params(std::span<const double> c) const override {
        detail::check_param_count(3, c.size(), "OpenCylinderUdf");
        return std::make_unique<OpenCylinderUdf>(cx_, cy_, c[0], c[1], c[2]);
    }

    Vec3 axis_point() const { return {cx_, cy_, 0.0}; }

private:
    struct Offsets {
        double dr;
        double dz;
        Vec3 radial;
    };

    Offsets offsets(const Point3& x) const {
        const double px = x.x - cx_, py = x.y - cy_;
        const double rho = std::hypot(px, py);
        // On the axis the radial direction is undefined; the ridge gets no radial term.
        const Vec3 radial = rho > 0.0 ? Vec3{px / rho, py / rho, 0.0} : Vec3{};
        const double dz = x.z - std::clamp(x.z, c_[1], c_[2]);
        return {rho - c_[0], dz, radial};
    }

    double cx_, cy_;
    std::array<double, 3> c_;
};

/// | |x - center| - r |. Parameters: [radius].
class SphereShellUdf final : public UdfField {
public:
    explicit SphereShellUdf(double radius, const Point3& center = {}) : center_(center), radius_(radius) {
        if (!(radius > 0.0)) throw std::invalid_argument("SphereShellUdf: radius must be positive");
    }

    std::size_t param_dim() const override { return 1; }
    double signed_distance(const Point3& x) const { return norm(x - center_) - radius_; }
    double eval(const Point3& x) const override { return std::abs(signed_distance(x)); }

    Gradient grad_x(const Point3& x) const override {
        const double s = signed_distance(x);
        if (s == 0.0) return {{}, true};
        return {normalized(x - center_) * detail::sign_of(s), false};
    }

    std::vector<double> param_sensitivity(const Point3& x) const override {
        return {-detail::sign_of(signed_distance(x))};
    }

    std::vector<double> params() const override { return {radius_}; }
    std::unique_ptr<UdfField> with_params(std::span<const double> c) const override {
        detail::check_param_count(1, c.size(), "SphereShellUdf");
        return std::make_unique<SphereShellUdf>(c[0], center_);
    }

    const Point3& center() const { return center_; }

private:
    Point3 center_;
    double radius_;
};

/// Rigidly translated mesh: phi(t, x) = udf_base(x - t). Parameters: [tx, ty, tz].
class TranslatedMeshUdf final : public UdfField {
public:
    TranslatedMeshUdf(std::shared_ptr<const MeshUdf> base, const Vec3& offset)
        : base_(std::move(base)), offset_(offset) {
        if (!base_) throw std::invalid_argument("TranslatedMeshUdf: null base");
    }

    std::size_t param_dim() const override { return 3; }
    double eval(const Point3& x) const override { return base_->eval(x - offset_); }
    Gradient grad_x(const Point3& x) const override { return base_->grad_x(x - offset_); }
    FieldSample sample(const Point3& x) const override { return base_->sample(x - offset_); }

    std::vector<double> param_sensitivity(const Point3& x) const override {
        const Gradient g = base_->grad_x(x - offset_);
        return {-g.value.x, -g.value.y, -g.value.z};
    }

    std::vector<double> params() const override { return {offset_.x, offset_.y, offset_.z}; }
    std::unique_ptr<UdfField> with_params(std::span<const double> c) const override {
        detail::check_param_count(3, c.size(), "TranslatedMeshUdf");
        return std::make_unique<TranslatedMeshUdf>(base_, Vec3{c[0], c[1], c[2]});
    }

private:
    std::shared_ptr<const MeshUdf> base_;
    Vec3 offset_;
};

}  // namespace udfmc
