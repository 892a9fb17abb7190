#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "udfmc/udfmc.hpp"

using namespace udfmc;

namespace {

GridSpec grid(std::uint32_t n) {
    GridSpec g;
    g.resolution = n;
    return g;
}

TriMesh one_triangle(double z0, double z1, double z2) {
    TriMesh m;
    m.vertices = {{0, 0, z0}, {0.1, 0, z1}, {0, 0.1, z2}};
    m.faces = {{0, 1, 2}};
    return m;
}

// Faces not lying on either patch plane: every vertex must be within half a
// step of the same plane for a face to belong to a patch.
std::size_t bridging_faces(const TriMesh& m, double z_a, double z_b, double step) {
    std::size_t n = 0;
    for (const auto& f : m.faces) {
        bool on_a = true, on_b = true;
        for (auto v : f) {
            on_a &= std::abs(m.vertices[v].z - z_a) < 0.5 * step;
            on_b &= std::abs(m.vertices[v].z - z_b) < 0.5 * step;
        }
        n += !on_a && !on_b;
    }
    return n;
}

// Fan with a closed border whose radius follows a triangle wave of period 4.
TriMesh zigzag_fan(int segments, double amplitude) {
    TriMesh m;
    m.vertices.push_back({0, 0, 0});
    const double wave[4] = {0.0, 1.0, 0.0, -1.0};
    for (int i = 0; i < segments; ++i) {
        const double t = 2.0 * std::numbers::pi * i / segments;
        const double r = 1.0 + amplitude * wave[i % 4];
        m.vertices.push_back({r * std::cos(t), r * std::sin(t), 0});
    }
    for (int i = 0; i < segments; ++i)
        m.faces.push_back({0, static_cast<std::uint32_t>(1 + i), static_cast<std::uint32_t>(1 + (i + 1) % segments)});
    return m;
}

// Largest deviation of the rim radii from their mean.
double rim_amplitude(const TriMesh& m) {
    double mean = 0.0;
    for (std::size_t i = 1; i < m.vertices.size(); ++i) mean += norm(m.vertices[i]);
    mean /= static_cast<double>(m.vertices.size() - 1);
    double amp = 0.0;
    for (std::size_t i = 1; i < m.vertices.size(); ++i) amp = std::max(amp, std::abs(norm(m.vertices[i]) - mean));
    return amp;
}

// Largest residual of a least-squares line fitted to (x, y) points.
double line_residual(const std::vector<Point3>& pts) {
    double mx = 0, my = 0;
    for (const auto& p : pts) mx += p.x, my += p.y;
    mx /= pts.size();
    my /= pts.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& p : pts) {
        sxx += (p.x - mx) * (p.x - mx);
        sxy += (p.x - mx) * (p.y - my);
        syy += (p.y - my) * (p.y - my);
    }
    // Principal direction of the 2x2 covariance.
    const double angle = 0.5 * std::atan2(2 * sxy, sxx - syy);
    const Vec3 nrm{-std::sin(angle), std::cos(angle), 0};
    double worst = 0.0;
    for (const auto& p : pts) worst = std::max(worst, std::abs(dot(p - Vec3{mx, my, p.z}, nrm)));
    return worst;
}

}  // namespace

TEST(RemoveSpuriousFacets, KeepsFacesOnTheSurface) {
    const PlaneUdf f({0, 0, 1}, 0.0);
    const double tol = 0.01;
    const TriMesh m = remove_spurious_facets(one_triangle(0.4 * tol, -0.4 * tol, 0.0), f, tol);
    EXPECT_EQ(m.num_faces(), 1u);
}

TEST(RemoveSpuriousFacets, DropsFacesWithAFarVertex) {
    const PlaneUdf f({0, 0, 1}, 0.0);
    const double tol = 0.01;
    const TriMesh m = remove_spurious_facets(one_triangle(0.0, 10 * tol, 0.0), f, tol);
    EXPECT_EQ(m.num_faces(), 0u);
    EXPECT_EQ(m.num_vertices(), 0u);
    EXPECT_THROW(remove_spurious_facets(m, f, 0.0), std::invalid_argument);
}

TEST(RemoveSpuriousFacets, NoBridgesBetweenNearbyPatches) {
    const GridSpec g = grid(65);
    const double step = g.max_step();
    const double z_a = 0.0031, z_b = z_a + 3 * step;
    const TriMesh scene = fixtures::append(fixtures::unit_patch(z_a), fixtures::unit_patch(z_b));
    const MeshUdf f(scene);
    const TriMesh raw = extract_mesh(f, g).mesh;
    const TriMesh pruned = remove_spurious_facets(raw, f, 0.5 * g.cell_diagonal());
    EXPECT_GT(bridging_faces(raw, z_a, z_b, step), 0u);
    EXPECT_EQ(bridging_faces(pruned, z_a, z_b, step), 0u);
    EXPECT_GT(pruned.num_faces(), 0u);
}

TEST(SmoothBorders, StraightBorderIsFixed) {
    // The short sides lie on the domain faces, so both long sides are open
    // polylines with fixed endpoints.
    const TriMesh m = fixtures::square_patch(-1, 1, -0.3, 0.3, 0.1, 8);
    const TriMesh s = smooth_borders(m, 5, 0.5, Aabb{{-1, -1, -1}, {1, 1, 1}});
    for (std::size_t i = 0; i < m.vertices.size(); ++i) EXPECT_NEAR(distance(m.vertices[i], s.vertices[i]), 0.0, 1e-15);
}

TEST(SmoothBorders, ZigZagAmplitudeShrinksEveryStep) {
    TriMesh m = zigzag_fan(64, 0.05);
    double amp = rim_amplitude(m);
    for (int step = 0; step < 5; ++step) {
        m = smooth_borders(m, 1, 0.5);
        const double next = rim_amplitude(m);
        EXPECT_LT(next, amp) << "step " << step;
        amp = next;
    }
    EXPECT_EQ(m.vertices[0], (Point3{0, 0, 0}));
}

TEST(SmoothBorders, ExtractedBorderGetsStraighter) {
    // Square patch rotated about z, so its sides cut the lattice obliquely.
    TriMesh patch = fixtures::square_patch(-0.5, 0.5, -0.5, 0.5, 0.0031);
    const double a = 0.4;
    for (auto& p : patch.vertices) p = {std::cos(a) * p.x - std::sin(a) * p.y, std::sin(a) * p.x + std::cos(a) * p.y, p.z};
    const MeshUdf f(patch);
    const GridSpec g = grid(65);
    const TriMesh raw = remove_spurious_facets(extract_mesh(f, g).mesh, f, 0.5 * g.cell_diagonal());
    const TriMesh smooth = smooth_borders(raw, 5, 0.5, Aabb{g.bounds_min, g.bounds_max});
    // Border vertices near the middle of the side facing +x after rotation.
    const Vec3 side_n{std::cos(a), std::sin(a), 0}, side_t{-std::sin(a), std::cos(a), 0};
    auto side = [&](const TriMesh& m) {
        std::vector<Point3> pts;
        for (const auto& be : border_edges(m))
            for (auto v : {be.edge.a, be.edge.b}) {
                const Point3& p = m.vertices[v];
                if (dot(p, side_n) > 0.4 && std::abs(dot(p, side_t)) < 0.3) pts.push_back(p);
            }
        return pts;
    };
    const auto before = side(raw), after = side(smooth);
    ASSERT_GT(before.size(), 10u);
    EXPECT_LT(line_residual(after), line_residual(before));
}

TEST(SmoothBorders, ClosedMeshUnchanged) {
    const TriMesh m = extract_mesh(SphereShellUdf(0.5), grid(17)).mesh;
    const TriMesh s = smooth_borders(m, 5, 0.5);
    EXPECT_EQ(s.vertices, m.vertices);
    EXPECT_EQ(s.faces, m.faces);
}

TEST(Postprocess, PatchStaysOpenAndOnSurface) {
    const MeshUdf f(fixtures::unit_patch());
    const GridSpec g = grid(33);
    const TriMesh m = postprocess(extract_mesh(f, g).mesh, f, g);
    EXPECT_GT(count_border_edges(m), 0u);
    for (const auto& v : m.vertices) {
        if (std::max(std::abs(v.x), std::abs(v.y)) < 0.45) {
            EXPECT_LT(std::abs(v.z - 0.0031), 1e-9);
        }
    }
}
