#include <cmath>
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

// Single-cell samples with constant values and no gradients.
GridSamples constant_cell(double u) {
    GridSamples s;
    s.spec = grid(2);
    s.u.assign(8, u);
    s.g.assign(8, Vec3{0, 0, 1});
    s.degenerate.assign(8, 0);
    return s;
}

}  // namespace

TEST(GridSpec, IndexingRoundTrips) {
    const GridSpec g = grid(7);
    EXPECT_EQ(g.num_corners(), 343u);
    EXPECT_EQ(g.num_cells(), 216u);
    for (std::uint64_t i = 0; i < g.num_corners(); ++i) {
        const auto c = g.corner_coords(i);
        EXPECT_EQ(g.corner_index(c[0], c[1], c[2]), i);
    }
    for (std::uint64_t i = 0; i < g.num_cells(); ++i) {
        const auto c = g.cell_coords(i);
        EXPECT_EQ(g.cell_index(c[0], c[1], c[2]), i);
    }
    EXPECT_EQ(g.corner_position(0), g.bounds_min);
    EXPECT_EQ(g.corner_position(6, 6, 6), g.bounds_max);
}

TEST(GridSpec, RejectsBadSpecs) {
    GridSpec g = grid(1);
    EXPECT_THROW(g.validate(), std::invalid_argument);
    g = grid(5);
    g.bounds_max.y = g.bounds_min.y;
    EXPECT_THROW(g.validate(), std::invalid_argument);
}

TEST(SampleGrid, PatchValuesAtThreeCorners) {
    const MeshUdf f(fixtures::square_patch(0, 1, 0, 1, 0));
    const GridSamples s = sample_grid(f, grid(3));
    ASSERT_EQ(s.u.size(), 27u);
    // Corners at z = +-1 right above or below the patch (x, y in [0, 1]).
    for (std::uint32_t k : {0u, 2u})
        for (std::uint32_t j : {1u, 2u})
            for (std::uint32_t i : {1u, 2u}) EXPECT_DOUBLE_EQ(s.u[s.spec.corner_index(i, j, k)], 1.0);
    EXPECT_EQ(s.u[s.spec.corner_index(1, 1, 1)], 0.0);
    EXPECT_TRUE(s.degenerate[s.spec.corner_index(1, 1, 1)]);
}

TEST(SampleGrid, SphereCentre) {
    const SphereShellUdf f(0.5);
    const GridSamples s = sample_grid(f, grid(3));
    EXPECT_DOUBLE_EQ(s.u[s.spec.corner_index(1, 1, 1)], 0.5);
}

TEST(SampleGrid, OpenCylinderMeshIsEikonal) {
    const MeshUdf f(fixtures::cylinder(0.4, -0.5, 0.5, 64, 8));
    const GridSamples s = sample_grid(f, grid(64));
    std::size_t positive = 0;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        ASSERT_GE(s.u[i], 0.0);
        if (s.u[i] > 0.0) {
            ++positive;
            ASSERT_NEAR(norm(s.g[i]), 1.0, 1e-6);
        }
    }
    EXPECT_EQ(positive, s.u.size());
}

TEST(SampleGrid, ThreadCountDoesNotChangeValues) {
    const SphereShellUdf f(0.5, {0.1, 0.0, -0.05});
    const auto a = sample_grid(f, grid(21), 1);
    const auto b = sample_grid(f, grid(21), 4);
    EXPECT_EQ(a.u, b.u);
}

TEST(CandidateCells, FarCellExcluded) {
    const GridSamples s = constant_cell(10.0 * grid(2).cell_diagonal());
    EXPECT_TRUE(candidate_cells(s, 1.0).empty());
}

TEST(CandidateCells, ZeroCellIncluded) {
    const GridSamples s = constant_cell(0.0);
    EXPECT_EQ(candidate_cells(s, 1.0), std::vector<std::uint64_t>{0});
}

TEST(CandidateCells, PlaneStraddlingCellsIncluded) {
    const PlaneUdf f({0, 0, 1}, 0.0);
    const GridSamples s = sample_grid(f, grid(64));
    const auto cells = candidate_cells(s, 1.0);
    const std::set<std::uint64_t> included(cells.begin(), cells.end());
    std::size_t straddling = 0;
    for (std::uint64_t c = 0; c < s.spec.num_cells(); ++c) {
        const auto cc = s.spec.cell_coords(c);
        const double z0 = s.spec.corner_position(0, 0, cc[2]).z, z1 = s.spec.corner_position(0, 0, cc[2] + 1).z;
        if (z0 <= 0.0 && z1 >= 0.0) {
            ++straddling;
            EXPECT_TRUE(included.count(c)) << "cell " << c;
        }
    }
    EXPECT_EQ(straddling, 63u * 63u);
    EXPECT_THROW(candidate_cells(s, 0.0), std::invalid_argument);
}

TEST(FiniteDifferenceGradients, ExactForLinearField) {
    const PlaneUdf f({1, 2, 2}, -3.0);  // far away: phi is linear over the box
    GridSamples s = sample_grid(f, grid(9));
    const auto exact = s.g;
    finite_difference_gradients(s);
    for (std::size_t i = 0; i < exact.size(); ++i) EXPECT_NEAR(distance(s.g[i], exact[i]), 0.0, 1e-12);
}

TEST(TrilinearGrid, InterpolatesLinearFieldExactly) {
    const PlaneUdf f({1, 2, 2}, -3.0);
    auto s = std::make_shared<GridSamples>(sample_grid(f, grid(5)));
    const TrilinearGridUdf t(s);
    for (const Point3 x : {Point3{0.13, -0.7, 0.42}, Point3{-0.99, 0.5, 0.0}, Point3{1.0, 1.0, 1.0}}) {
        EXPECT_NEAR(t.eval(x), f.eval(x), 1e-12);
        EXPECT_NEAR(distance(t.grad_x(x).value, f.grad_x(x).value), 0.0, 1e-12);
    }
    EXPECT_EQ(t.eval(s->spec.corner_position(7)), s->u[7]);
}
