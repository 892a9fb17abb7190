#pragma once

// Minimal z-buffered triangle rasterizer producing silhouettes and normal maps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "mesh.hpp"

namespace udfmc {

struct Camera {
    Point3 eye;
    Point3 target;
    Vec3 up{0.0, 0.0, 1.0};
    double fov_y_deg = 45.0;
    int width = 256;
    int height = 256;
};

/// Per-pixel coverage and world-space unit normal (facing the camera).
struct NormalMap {
    int width = 0;
    int height = 0;
    std::vector<char> mask;
    std::vector<Vec3> normal;
    std::vector<double> depth;

    std::size_t covered() const { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)); }
};

inline NormalMap render_normals(const TriMesh& mesh, const Camera& cam) {
    NormalMap img;
    img.width = cam.width;
    img.height = cam.height;
    const std::size_t npix = static_cast<std::size_t>(cam.width) * cam.height;
    img.mask.assign(npix, 0);
    img.normal.assign(npix, Vec3{});
    img.depth.assign(npix, std::numeric_limits<double>::infinity());

    const Vec3 fwd = normalized(cam.target - cam.eye);
    Vec3 up = cam.up;
    if (norm(cross(fwd, up)) < 1e-6) up = {0.0, 1.0, 0.0};
    const Vec3 right = normalized(cross(fwd, up));
    const Vec3 cam_up = cross(right, fwd);
    const double f = 1.0 / std::tan(0.5 * cam.fov_y_deg * std::numbers::pi / 180.0);
    const double aspect = static_cast<double>(cam.width) / cam.height;
    constexpr double kNear = 1e-6;

    struct Projected {
        double sx, sy, z;
    };
    auto project = [&](const Point3& p) {
        const Vec3 d = p - cam.eye;
        const double z = dot(d, fwd);
        const double x = dot(d, right) * f / aspect / z;
        const double y = dot(d, cam_up) * f / z;
        return Projected{(x + 1.0) * 0.5 * cam.width, (1.0 - y) * 0.5 * cam.height, z};
    };

    for (const Face& face : mesh.faces) {
        const Point3& a = mesh.vertices[face[0]];
        const Point3& b = mesh.vertices[face[1]];
        const Point3& c = mesh.vertices[face[2]];
        Vec3 n = face_normal(mesh, face);
        if (norm(n) == 0.0) continue;
        const Point3 centroid = (a + b + c) / 3.0;
        if (dot(n, cam.eye - centroid) < 0.0) n = -n;

        const Projected p[3] = {project(a), project(b), project(c)};
        if (p[0].z < kNear || p[1].z < kNear || p[2].z < kNear) continue;

        const double area = (p[1].sx - p[0].sx) * (p[2].sy - p[0].sy) - (p[2].sx - p[0].sx) * (p[1].sy - p[0].sy);
        if (area == 0.0) continue;
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({p[0].sx, p[1].sx, p[2].sx}))));
        const int x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(std::max({p[0].sx, p[1].sx, p[2].sx}))));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({p[0].sy, p[1].sy, p[2].sy}))));
        const int y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(std::max({p[0].sy, p[1].sy, p[2].sy}))));
        for (int py = y0; py <= y1; ++py) {
            for (int px = x0; px <= x1; ++px) {
                const double qx = px + 0.5, qy = py + 0.5;
                double w[3];
                for (int k = 0; k < 3; ++k) {
                    const Projected& s = p[(k + 1) % 3];
                    const Projected& t = p[(k + 2) % 3];
                    w[k] = ((t.sx - s.sx) * (qy - s.sy) - (qx - s.sx) * (t.sy - s.sy)) / area;
                }
                if (w[0] < 0.0 || w[1] < 0.0 || w[2] < 0.0) continue;
                // Perspective-correct depth: 1/z is affine in screen space.
                const double inv_z = w[0] / p[0].z + w[1] / p[1].z + w[2] / p[2].z;
                const double z = 1.0 / inv_z;
                const std::size_t idx = static_cast<std::size_t>(py) * cam.width + px;
                if (z < img.depth[idx]) {
                    img.depth[idx] = z;
                    img.mask[idx] = 1;
                    img.normal[idx] = n;
                }
            }
        }
    }
    return img;
}

}  // namespace udfmc
