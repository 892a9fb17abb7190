#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vec3.hpp"

namespace udfmc {

/// Spatial gradient of a field. `degenerate` is set where the field is exactly
/// zero (the gradient of a distance is undefined on the surface); the vector is
/// then zero and must not be used as an anchor direction.
struct Gradient {
    Vec3 value;
    bool degenerate = false;
};

struct FieldSample {
    double distance = 0.0;
    Gradient gradient;
};

/// Unsigned distance field phi(c, x) >= 0 over world-space points x, conditioned
/// on a parameter vector c of length param_dim().
///
/// Implementations are immutable after construction; every query is const and
/// safe to call concurrently. Parameter updates produce a new field through
/// with_params().
class UdfField {
public:
    virtual ~UdfField() = default;

    virtual std::size_t param_dim() const = 0;
    virtual double eval(const Point3& x) const = 0;
    virtual Gradient grad_x(const Point3& x) const = 0;

    /// Row d(phi)/dc at fixed x, length param_dim().
    virtual std::vector<double> param_sensitivity(const Point3& x) const = 0;

    virtual std::vector<double> params() const = 0;
    virtual std::unique_ptr<UdfField> with_params(std::span<const double> c) const = 0;

    /// Distance and gradient together; overridden where one pass yields both.
    virtual FieldSample sample(const Point3& x) const { return {eval(x), grad_x(x)}; }
};

namespace detail {

inline void check_param_count(std::size_t expected, std::size_t got, const char* what) {
    if (expected != got)
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(expected) +
                                    " parameters, got " + std::to_string(got));
}

}  // namespace detail

/// Field known only through point evaluations. Spatial gradients and parameter
/// sensitivities use central differences; the spatial step is 1e-4 times the
/// domain scale (bounding-box diagonal of the region of interest), the parameter
/// step is 1e-4 times max(1, |c_k|).
class BlackBoxUdf final : public UdfField {
public:
    using Function = std::function<double(std::span<const double>, const Point3&)>;

    BlackBoxUdf(Function fn, std::vector<double> params, double domain_scale)
        : fn_(std::move(fn)), params_(std::move(params)), step_(1e-4 * domain_scale) {
        if (!(domain_scale > 0.0)) throw std::invalid_argument("BlackBoxUdf: domain scale must be positive");
    }

    std::size_t param_dim() const override { return params_.size(); }
    double eval(const Point3& x) const override { return fn_(params_, x); }

    Gradient grad_x(const Point3& x) const override {
        if (eval(x) == 0.0) return {{}, true};
        Vec3 g;
        for (int a = 0; a < 3; ++a) {
            Point3 xp = x, xm = x;
            xp[a] += step_;
            xm[a] -= step_;
            g[a] = (eval(xp) - eval(xm)) / (2.0 * step_);
        }
        return {g, false};
    }

    std::vector<double> param_sensitivity(const Point3& x) const override {
        std::vector<double> out(params_.size());
        std::vector<double> c = params_;
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double h = 1e-4 * std::max(1.0, std::abs(params_[k]));
            c[k] = params_[k] + h;
            const double fp = fn_(c, x);
            c[k] = params_[k] - h;
            const double fm = fn_(c, x);
            c[k] = params_[k];
            out[k] = (fp - fm) / (2.0 * h);
        }
        return out;
    }

    std::vector<double> params() const override { return params_; }

    std::unique_ptr<UdfField> with_params(std::span<const double> c) const override {
        detail::check_param_count(params_.size(), c.size(), "BlackBoxUdf");
        return std::make_unique<BlackBoxUdf>(fn_, std::vector<double>(c.begin(), c.end()), step_ / 1e-4);
    }

private:
    Function fn_;
    std::vector<double> params_;
    double step_;
};

}  // namespace udfmc
