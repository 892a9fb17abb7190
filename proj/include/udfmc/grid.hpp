#pragma once

#include <array>
#include <algorithm>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"
#include "parallel.hpp"
#include "vec3.hpp"

namespace udfmc {

/// Regular lattice over [bounds_min, bounds_max] with `resolution` corners per
/// axis, i.e. resolution - 1 cells per axis.
struct GridSpec {
    Point3 bounds_min{-1.0, -1.0, -1.0};
    Point3 bounds_max{1.0, 1.0, 1.0};
    std::uint32_t resolution = 129;

    void validate() const {
        if (resolution < 2) throw std::invalid_argument("GridSpec: resolution must be at least 2");
        for (int a = 0; a < 3; ++a)
            if (!(bounds_min[a] < bounds_max[a]))
                throw std::invalid_argument("GridSpec: bounds_min must be below bounds_max on every axis");
    }

    Vec3 step() const { return (bounds_max - bounds_min) / static_cast<double>(resolution - 1); }
    double cell_diagonal() const { return norm(step()); }
    /// Largest per-axis step, used wherever a scalar "step size" is needed.
    double max_step() const {
        const Vec3 s = step();
        return std::max(s.x, std::max(s.y, s.z));
    }

    std::uint32_t cells_per_axis() const { return resolution - 1; }
    std::uint64_t num_corners() const { return std::uint64_t{resolution} * resolution * resolution; }
    std::uint64_t num_cells() const {
        const std::uint64_t c = cells_per_axis();
        return c * c * c;
    }

    std::uint64_t corner_index(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
        return i + std::uint64_t{resolution} * (j + std::uint64_t{resolution} * k);
    }
    std::array<std::uint32_t, 3> corner_coords(std::uint64_t idx) const {
        const std::uint64_t n = resolution;
        return {static_cast<std::uint32_t>(idx % n), static_cast<std::uint32_t>((idx / n) % n),
                static_cast<std::uint32_t>(idx / (n * n))};
    }
    Point3 corner_position(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
        const Vec3 s = step();
        // Multiply-from-min keeps corner coordinates independent of traversal order.
        return {bounds_min.x + s.x * i, bounds_min.y + s.y * j, bounds_min.z + s.z * k};
    }
    Point3 corner_position(std::uint64_t idx) const {
        const auto c = corner_coords(idx);
        return corner_position(c[0], c[1], c[2]);
    }

    std::uint64_t cell_index(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
        const std::uint64_t c = cells_per_axis();
        return i + c * (j + c * k);
    }
    std::array<std::uint32_t, 3> cell_coords(std::uint64_t idx) const {
        const std::uint64_t c = cells_per_axis();
        return {static_cast<std::uint32_t>(idx % c), static_cast<std::uint32_t>((idx / c) % c),
                static_cast<std::uint32_t>(idx / (c * c))};
    }
};

/// Field values u and spatial gradients g at every lattice corner, x-fastest.
struct GridSamples {
    GridSpec spec;
    std::vector<double> u;
    std::vector<Vec3> g;
    std::vector<char> degenerate;
};

/// Evaluates the field at every corner. Slabs of constant z are distributed
/// over `threads` workers (0 = default); every corner writes its own slot.
inline GridSamples sample_grid(const UdfField& field, const GridSpec& spec, unsigned threads = 0) {
    spec.validate();
    GridSamples out;
    out.spec = spec;
    const std::uint64_t n = spec.num_corners();
    out.u.resize(n);
    out.g.resize(n);
    out.degenerate.resize(n);
    const std::uint32_t res = spec.resolution;
    parallel_for(res, threads, [&](std::size_t k) {
        for (std::uint32_t j = 0; j < res; ++j)
            for (std::uint32_t i = 0; i < res; ++i) {
                const std::uint64_t idx = spec.corner_index(i, j, static_cast<std::uint32_t>(k));
                const FieldSample s = field.sample(spec.corner_position(i, j, static_cast<std::uint32_t>(k)));
                out.u[idx] = s.distance;
                out.g[idx] = s.gradient.value;
                out.degenerate[idx] = s.gradient.degenerate ? 1 : 0;
            }
    });
    return out;
}

/// Bourke corner order: bit pattern (dx, dy, dz) for corners 0..7.
inline constexpr std::array<std::array<std::uint32_t, 3>, 8> kCornerOffsets{{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

inline std::array<std::uint64_t, 8> cell_corners(const GridSpec& spec, std::uint64_t cell) {
    const auto c = spec.cell_coords(cell);
    std::array<std::uint64_t, 8> out{};
    for (int k = 0; k < 8; ++k)
        out[k] = spec.corner_index(c[0] + kCornerOffsets[k][0], c[1] + kCornerOffsets[k][1],
                                   c[2] + kCornerOffsets[k][2]);
    return out;
}

/// Cells whose mean corner value is at most cull_factor times the cell
/// diagonal, in ascending cell-index order.
inline std::vector<std::uint64_t> candidate_cells(const GridSamples& samples, double cull_factor) {
    if (!(cull_factor > 0.0)) throw std::invalid_argument("candidate_cells: cull_factor must be positive");
    const GridSpec& spec = samples.spec;
    const double threshold = cull_factor * spec.cell_diagonal();
    std::vector<std::uint64_t> out;
    const std::uint64_t cells = spec.num_cells();
    for (std::uint64_t cell = 0; cell < cells; ++cell) {
        double sum = 0.0;
        for (auto corner : cell_corners(spec, cell)) sum += samples.u[corner];
        if (sum / 8.0 <= threshold) out.push_back(cell);
    }
    return out;
}

/// Central-difference gradients on the lattice (one-sided on the boundary),
/// for grids loaded without a gradient channel.
inline void finite_difference_gradients(GridSamples& samples) {
    const GridSpec& spec = samples.spec;
    const std::uint32_t n = spec.resolution;
    const Vec3 h = spec.step();
    samples.g.assign(spec.num_corners(), Vec3{});
    samples.degenerate.assign(spec.num_corners(), 0);
    for (std::uint32_t k = 0; k < n; ++k)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t i = 0; i < n; ++i) {
                const std::array<std::uint32_t, 3> c{i, j, k};
                Vec3 g;
                for (int a = 0; a < 3; ++a) {
                    auto lo = c, hi = c;
                    if (c[a] > 0) --lo[a];
                    if (c[a] + 1 < n) ++hi[a];
                    const double du = samples.u[spec.corner_index(hi[0], hi[1], hi[2])] -
                                      samples.u[spec.corner_index(lo[0], lo[1], lo[2])];
                    g[a] = du / (h[a] * (hi[a] - lo[a]));
                }
                const std::uint64_t idx = spec.corner_index(i, j, k);
                samples.g[idx] = g;
                samples.degenerate[idx] = samples.u[idx] == 0.0 ? 1 : 0;
            }
}

/// Trilinear interpolation of the u channel of a sampled grid, clamped to the
/// lattice bounds. Lets grids loaded from disk drive post-processing.
class TrilinearGridUdf final : public UdfField {
public:
    explicit TrilinearGridUdf(std::shared_ptr<const GridSamples> samples) : s_(std::move(samples)) {
        if (!s_) throw std::invalid_argument("TrilinearGridUdf: null samples");
    }

    std::size_t param_dim() const override { return 0; }
    double eval(const Point3& x) const override { return interpolate(x, nullptr); }
    Gradient grad_x(const Point3& x) const override {
        Vec3 g;
        const double u = interpolate(x, &g);
        return {g, u == 0.0};
    }
    std::vector<double> param_sensitivity(const Point3&) const override { return {}; }
    std::vector<double> params() const override { return {}; }
    std::unique_ptr<UdfField> with_params(std::span<const double> c) const override {
        detail::check_param_count(0, c.size(), "TrilinearGridUdf");
        return std::make_unique<TrilinearGridUdf>(s_);
    }

private:
    double interpolate(const Point3& x, Vec3* grad) const {
        const GridSpec& spec = s_->spec;
        const Vec3 h = spec.step();
        std::array<std::uint32_t, 3> i0{};
        std::array<double, 3> t{};
        for (int a = 0; a < 3; ++a) {
            const double f = std::clamp((x[a] - spec.bounds_min[a]) / h[a], 0.0, double(spec.resolution - 1));
            const auto i = std::min(static_cast<std::uint32_t>(f), spec.resolution - 2);
            i0[a] = i;
            t[a] = f - i;
        }
        double c[8];
        for (int k = 0; k < 8; ++k)
            c[k] = s_->u[spec.corner_index(i0[0] + (k & 1), i0[1] + ((k >> 1) & 1), i0[2] + ((k >> 2) & 1))];
        auto lerp = [](double a, double b, double w) { return a + w * (b - a); };
        const double x00 = lerp(c[0], c[1], t[0]), x10 = lerp(c[2], c[3], t[0]);
        const double x01 = lerp(c[4], c[5], t[0]), x11 = lerp(c[6], c[7], t[0]);
        const double y0 = lerp(x00, x10, t[1]), y1 = lerp(x01, x11, t[1]);
        if (grad) {
            const double dx0 = lerp(c[1] - c[0], c[3] - c[2], t[1]), dx1 = lerp(c[5] - c[4], c[7] - c[6], t[1]);
            (*grad)[0] = lerp(dx0, dx1, t[2]) / h[0];
            (*grad)[1] = lerp(x10 - x00, x11 - x01, t[2]) / h[1];
            (*grad)[2] = (y1 - y0) / h[2];
        }
        return lerp(y0, y1, t[2]);
    }

    std::shared_ptr<const GridSamples> s_;
};

}  // namespace udfmc
