#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

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

std::vector<Point3> random_points(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Point3> pts(n);
    for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
    return pts;
}

// O(n^2) reference, summed in the same order as the library.
double brute_chamfer(const std::vector<Point3>& a, const std::vector<Point3>& b) {
    auto one_way = [](const std::vector<Point3>& p, const std::vector<Point3>& q) {
        double sum = 0.0;
        for (const auto& x : p) {
            double best = HUGE_VAL;
            for (const auto& y : q) best = std::min(best, squared_norm(y - x));
            sum += best;
        }
        return sum / static_cast<double>(p.size());
    };
    return one_way(a, b) + one_way(b, a);
}

TriMesh small_triangle(const Point3& c, double s) {
    TriMesh m;
    m.vertices = {c, c + Vec3{s, 0, 0}, c + Vec3{0, s, 0}};
    m.faces = {{0, 1, 2}};
    return m;
}

TriMesh tilted_patch() {
    TriMesh m = fixtures::square_patch(-0.5, 0.5, -0.5, 0.5, 0.0, 4);
    const double a = 0.1;
    for (auto& p : m.vertices) p = {p.x, std::cos(a) * p.y, std::sin(a) * p.y + 0.0031};
    return m;
}

// Face-connected components.
std::size_t components(const TriMesh& m) {
    std::vector<std::uint32_t> parent(m.vertices.size());
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const auto& f : m.faces) {
        parent[find(f[1])] = find(f[0]);
        parent[find(f[2])] = find(f[0]);
    }
    std::set<std::uint32_t> roots;
    for (const auto& f : m.faces) roots.insert(find(f[0]));
    return roots.size();
}

}  // namespace

TEST(SampleSurface, UniformOverQuadrants) {
    const TriMesh m = fixtures::square_patch(-0.5, 0.5, -0.5, 0.5, 0.0, 3);
    const std::size_t n = 100000;
    std::array<std::size_t, 4> count{};
    for (const auto& s : sample_surface(m, n, 11)) count[(s.point.x > 0) + 2 * (s.point.y > 0)]++;
    for (auto c : count) EXPECT_NEAR(static_cast<double>(c) / n, 0.25, 0.02 * 0.25);
}

TEST(SampleSurface, BarycentricWeightsAreValid) {
    TriMesh m;
    m.vertices = {{0.1, 0.2, 0.3}, {0.9, -0.4, 0.0}, {-0.2, 0.7, 0.5}};
    m.faces = {{0, 1, 2}};
    for (const auto& s : sample_surface(m, 2000, 5)) {
        double sum = 0.0;
        for (double w : s.bary) {
            EXPECT_GE(w, 0.0);
            sum += w;
        }
        EXPECT_NEAR(sum, 1.0, 1e-15);
        const Point3 p = s.bary[0] * m.vertices[0] + s.bary[1] * m.vertices[1] + s.bary[2] * m.vertices[2];
        EXPECT_EQ(p, s.point);
        EXPECT_NEAR(norm(s.normal), 1.0, 1e-15);
    }
}

TEST(SampleSurface, SeedFixesTheSet) {
    const TriMesh m = fixtures::octahedron();
    const auto a = sample_points(sample_surface(m, 500, 3));
    const auto b = sample_points(sample_surface(m, 500, 3));
    const auto c = sample_points(sample_surface(m, 500, 4));
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(SampleSurface, ZeroAreaRejected) {
    TriMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    m.faces = {{0, 1, 2}};
    EXPECT_THROW(sample_surface(m, 10, 0), std::invalid_argument);
    EXPECT_THROW(sample_surface(TriMesh{}, 10, 0), std::invalid_argument);
}

TEST(Chamfer, IdenticalSetsGiveZero) {
    const auto a = random_points(300, 1);
    EXPECT_EQ(chamfer(a, a), 0.0);
}

TEST(Chamfer, SinglePointPair) {
    const std::vector<Point3> a{{0, 0, 0}}, b{{0, 0, 1}};
    EXPECT_EQ(chamfer(a, b), 2.0);
}

TEST(Chamfer, MatchesBruteForce) {
    for (std::size_t n : {100u, 200u}) {
        const auto a = random_points(n, 10 + n), b = random_points(n + 17, 20 + n);
        EXPECT_EQ(chamfer(a, b), brute_chamfer(a, b)) << n;
        EXPECT_EQ(chamfer(a, b), chamfer(b, a)) << n;
        EXPECT_EQ(chamfer(a, b, 1), chamfer(a, b, 4)) << n;
    }
    EXPECT_THROW(chamfer(std::vector<Point3>{}, random_points(3, 0)), std::invalid_argument);
}

TEST(NormalConsistency, Identical) {
    const auto s = sample_surface(fixtures::octahedron(), 2000, 1);
    const auto p = sample_points(s);
    std::vector<Vec3> n;
    for (const auto& x : s) n.push_back(x.normal);
    EXPECT_NEAR(normal_consistency(p, n, p, n), 100.0, 1e-12);
}

TEST(NormalConsistency, PerpendicularPlanes) {
    const auto p = random_points(200, 3);
    const std::vector<Vec3> nz(p.size(), Vec3{0, 0, 1}), nx(p.size(), Vec3{1, 0, 0});
    EXPECT_EQ(normal_consistency(p, nz, p, nx), 0.0);
}

TEST(NormalConsistency, FlippedNormalsAreInvisible) {
    const auto s = sample_surface(fixtures::octahedron(), 1000, 2);
    const auto p = sample_points(s);
    const auto q = sample_points(sample_surface(fixtures::octahedron(), 1000, 3));
    std::vector<Vec3> n, n_flip, n_mixed;
    for (std::size_t i = 0; i < s.size(); ++i) {
        n.push_back(s[i].normal);
        n_flip.push_back(-s[i].normal);
        n_mixed.push_back(i % 3 == 0 ? -s[i].normal : s[i].normal);
    }
    const double base = normal_consistency(p, n, q, n);
    EXPECT_EQ(normal_consistency(p, n_flip, q, n), base);
    EXPECT_EQ(normal_consistency(p, n_mixed, q, n), base);
    EXPECT_EQ(normal_consistency(p, n, p, n_flip), normal_consistency(p, n, p, n));
}

TEST(ImageConsistency, IdentityNearHundred) {
    for (const TriMesh& m : {fixtures::octahedron(), fixtures::unit_patch(), fixtures::cylinder(0.4, -0.5, 0.5, 48, 6),
                             extract_mesh(SphereShellUdf(0.5), grid(33)).mesh}) {
        const auto r = image_consistency(m, m);
        EXPECT_GE(r.ic, 99.5);
        EXPECT_LE(r.ic, 100.0 + 1e-9);
        for (const auto& v : r.views) EXPECT_FALSE(v.skipped);
    }
}

TEST(ImageConsistency, DisjointSilhouettesScoreZero) {
    const TriMesh a = small_triangle({-1, -1, 0}, 0.05), b = small_triangle({1, -1, 0}, 0.05);
    const auto r = image_consistency(a, b);
    std::size_t used = 0;
    for (const auto& v : r.views) {
        if (v.skipped) continue;
        ++used;
        EXPECT_EQ(v.co_covered_pixels, 0u);
        EXPECT_EQ(v.iou, 0.0);
    }
    EXPECT_EQ(used, 8u);
    EXPECT_EQ(r.ic, 0.0);
}

TEST(ImageConsistency, InflatedPatchScoresBelowIdentity) {
    const TriMesh patch = fixtures::unit_patch();
    const GridSpec g = grid(65);
    const TriMesh inflated = inflate_mesh(MeshUdf(patch), g, 2.0 * default_inflation_eps(g));
    EXPECT_LT(image_consistency(inflated, patch).ic, image_consistency(patch, patch).ic);
}

TEST(ImageConsistency, DegenerateFacesSkipViews) {
    TriMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 0, 0}, {0, 1, 1}, {0, 2, 2}};
    m.faces = {{0, 1, 2}, {3, 4, 5}};
    const auto r = image_consistency(m, m);
    EXPECT_EQ(r.warnings.size(), 8u);
    for (const auto& v : r.views) EXPECT_TRUE(v.skipped);
    EXPECT_THROW(image_consistency(TriMesh{}, m), std::invalid_argument);
}

TEST(Inflation, WatertightAtDefaultEps) {
    const MeshUdf f(fixtures::unit_patch());
    const GridSpec g = grid(65);
    const double eps = default_inflation_eps(g), h = g.max_step(), z0 = 0.0031;
    const TriMesh m = inflate_mesh(f, g, eps);
    EXPECT_GT(m.num_faces(), 0u);
    EXPECT_EQ(count_border_edges(m), 0u);
    EXPECT_EQ(count_border_edges(inflate_mesh(MeshUdf(tilted_patch()), g, eps)), 0u);
    // Away from the rim the lower sheet is exact; the upper one is linearly
    // interpolated across the kink of |z - z0| between the corners z = 0 and h.
    const double lower = z0 - eps, upper = (eps - z0) / (h - z0 - z0) * h;
    for (const auto& v : m.vertices) {
        if (std::max(std::abs(v.x), std::abs(v.y)) >= 0.4) continue;
        EXPECT_NEAR(std::min(std::abs(v.z - lower), std::abs(v.z - upper)), 0.0, 1e-12) << v.z;
    }
}

TEST(Inflation, HolesWhenEpsBelowHalfStep) {
    // Marching cubes output is closed inside the box, so holes show up as the
    // shell tearing into separate blobs rather than as border edges.
    const MeshUdf f(tilted_patch());
    const GridSpec g = grid(65);
    const TriMesh thin = inflate_mesh(f, g, 0.3 * g.max_step());
    EXPECT_EQ(count_border_edges(thin), 0u);
    EXPECT_GT(components(thin), 1u);
    EXPECT_EQ(components(inflate_mesh(f, g, default_inflation_eps(g))), 1u);
    EXPECT_THROW(inflate_mesh(f, g, 0.0), std::invalid_argument);
}

TEST(Inflation, ChamferOrdering) {
    const TriMesh gt = fixtures::unit_patch();
    const MeshUdf f(gt);
    const GridSpec g = grid(129);
    const TriMesh ours = postprocess(extract_mesh(f, g).mesh, f, g);
    MetricsOptions o;
    o.image_consistency = false;
    const double chd_ours = evaluate_meshes(ours, gt, o).chd;
    double prev = chd_ours;
    for (double k : {0.55, 0.8, 1.2}) {
        const double chd = evaluate_meshes(inflate_mesh(f, g, k * g.max_step()), gt, o).chd;
        EXPECT_GT(chd, prev) << "eps " << k << " x step";
        prev = chd;
    }
}
