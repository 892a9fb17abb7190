#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "mesh.hpp"

namespace udfmc {

/// Point drawn on a mesh face, with the face's unit normal and the barycentric
/// weights of the three face corners.
struct SurfaceSample {
    Point3 point;
    Vec3 normal;
    std::uint32_t face = 0;
    std::array<double, 3> bary{};
};

/// Area-weighted uniform samples. The same seed always yields the same set.
inline std::vector<SurfaceSample> sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed) {
    if (mesh.faces.empty()) throw std::invalid_argument("sample_surface: mesh has no faces");
    std::vector<double> cdf(mesh.faces.size());
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        total += face_area(mesh, mesh.faces[f]);
        cdf[f] = total;
    }
    if (!(total > 0.0)) throw std::invalid_argument("sample_surface: mesh has zero area");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<SurfaceSample> out(n);
    for (auto& s : out) {
        const double r = uni(rng) * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
        if (it == cdf.end()) --it;
        s.face = static_cast<std::uint32_t>(it - cdf.begin());
        // Skip zero-area faces that share a cdf value with their predecessor.
        while (face_area(mesh, mesh.faces[s.face]) == 0.0 && s.face + 1 < mesh.faces.size()) ++s.face;

        const double r1 = std::sqrt(uni(rng));
        const double r2 = uni(rng);
        s.bary = {1.0 - r1, r1 * (1.0 - r2), r1 * r2};
        const Face& f = mesh.faces[s.face];
        s.point = s.bary[0] * mesh.vertices[f[0]] + s.bary[1] * mesh.vertices[f[1]] + s.bary[2] * mesh.vertices[f[2]];
        s.normal = face_normal(mesh, f);
    }
    return out;
}

inline std::vector<Point3> sample_points(const std::vector<SurfaceSample>& samples) {
    std::vector<Point3> pts(samples.size());
    std::transform(samples.begin(), samples.end(), pts.begin(), [](const SurfaceSample& s) { return s.point; });
    return pts;
}

}  // namespace udfmc
