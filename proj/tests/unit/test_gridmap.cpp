#include <gtest/gtest.h>

#include <fstream>

#include "frontier_lab/gridmap.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace flab;
using testing_support::TempDir;

namespace {

void write_raw_pgm(const std::filesystem::path& p, int w, int h, const std::vector<std::uint8_t>& px) {
    write_pgm(GrayImage{w, h, px}, p);
}

}  // namespace

TEST(CellState, NumericEncodingRoundTrips) {
    for (CellState s : {CellState::Free, CellState::Unknown, CellState::Occupied}) {
        EXPECT_EQ(cell_from_value(to_value(s)), s);
    }
    EXPECT_EQ(to_value(CellState::Free), 0.0);
    EXPECT_EQ(to_value(CellState::Unknown), 0.5);
    EXPECT_EQ(to_value(CellState::Occupied), 1.0);
    EXPECT_THROW(cell_from_value(0.25), ContractViolation);
}

TEST(Grid, RejectsDegenerateShapes) {
    EXPECT_THROW(OccupancyGrid(0, 3), ContractViolation);
    EXPECT_THROW(OccupancyGrid(3, -1), ContractViolation);
    EXPECT_THROW(OccupancyGrid(3, 3, CellState::Free, 0.0), ContractViolation);
    OccupancyGrid g(4, 3);
    EXPECT_EQ(g.size(), 12u);
    EXPECT_EQ(g.resolution(), kDefaultResolution);
}

TEST(Grid, ProbabilityValidation) {
    ProbabilityGrid p(2, 2, 0.3);
    EXPECT_NO_THROW(validate_probability(p));
    p(1, 1) = 1.5;
    EXPECT_THROW(validate_probability(p), ContractViolation);
    p(1, 1) = std::nan("");
    EXPECT_THROW(validate_probability(p), ContractViolation);
}

TEST(LoadMap, UniformImages) {
    TempDir dir;
    write_raw_pgm(dir / "white.pgm", 3, 3, std::vector<std::uint8_t>(9, 255));
    write_raw_pgm(dir / "black.pgm", 3, 3, std::vector<std::uint8_t>(9, 0));
    const auto white = load_map(dir / "white.pgm");
    const auto black = load_map(dir / "black.pgm");
    EXPECT_EQ(count_state(white, CellState::Free), 9u);
    EXPECT_EQ(count_state(black, CellState::Occupied), 9u);
    EXPECT_EQ(white.resolution(), 0.10);
}

TEST(LoadMap, OneDarkRow) {
    TempDir dir;
    std::vector<std::uint8_t> px(4 * 3, 255);
    for (int x = 0; x < 4; ++x) px[1 * 4 + x] = 0;
    write_raw_pgm(dir / "row.pgm", 4, 3, px);
    const auto g = load_map(dir / "row.pgm");
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) EXPECT_EQ(g(x, y), y == 1 ? CellState::Occupied : CellState::Free) << x << "," << y;
}

TEST(LoadMap, GrayThresholdBoundaries) {
    TempDir dir;
    // 63 and 64 straddle the occupied cut; 192 and 193 the free cut.
    write_raw_pgm(dir / "t.pgm", 4, 1, {63, 64, 192, 193});
    const auto g = load_map(dir / "t.pgm");
    EXPECT_EQ(g(0, 0), CellState::Occupied);
    EXPECT_EQ(g(1, 0), CellState::Unknown);
    EXPECT_EQ(g(2, 0), CellState::Unknown);
    EXPECT_EQ(g(3, 0), CellState::Free);
}

TEST(LoadMap, Errors) {
    TempDir dir;
    EXPECT_THROW(load_map(dir / "missing.pgm"), MapIoError);
    {
        std::ofstream(dir / "bad.pgm") << "P2\n2 2\n255\n0 0 0 0\n";
    }
    EXPECT_THROW(load_map(dir / "bad.pgm"), MapIoError);
    {
        std::ofstream(dir / "short.pgm", std::ios::binary) << "P5\n4 4\n255\n" << std::string(3, '\0');
    }
    EXPECT_THROW(load_map(dir / "short.pgm"), MapIoError);
    {
        std::ofstream(dir / "empty.pgm", std::ios::binary) << "P5\n0 4\n255\n";
    }
    EXPECT_THROW(load_map(dir / "empty.pgm"), MapIoError);
}

TEST(LoadMap, SidecarOverridesResolution) {
    TempDir dir;
    write_raw_pgm(dir / "m.pgm", 2, 2, std::vector<std::uint8_t>(4, 255));
    std::ofstream(dir / "m.meta.json") << R"({"resolution_m": 0.05})";
    EXPECT_DOUBLE_EQ(load_map(dir / "m.pgm").resolution(), 0.05);
}

TEST(SaveMap, RoundTripIsIdentityOnRandomGrids) {
    TempDir dir;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        OccupancyGrid g = oracle::random_grid(17 + static_cast<int>(seed), 9, seed, 0.3, 0.3);
        save_map(g, dir / "g.pgm");
        EXPECT_EQ(load_map(dir / "g.pgm"), g) << seed;
    }
    OccupancyGrid fine(5, 5, CellState::Free, 0.05);
    save_map(fine, dir / "fine.pgm");
    EXPECT_EQ(load_map(dir / "fine.pgm"), fine);
}

TEST(ProbabilityMap, EightBitRoundTrip) {
    TempDir dir;
    ProbabilityGrid p(3, 1);
    p(0, 0) = 0.0;
    p(1, 0) = 128.0 / 255.0;
    p(2, 0) = 1.0;
    save_probability_map(p, dir / "p.pgm");
    const auto q = load_probability_map(dir / "p.pgm");
    for (int x = 0; x < 3; ++x) EXPECT_NEAR(q(x, 0), p(x, 0), 1e-12);
}

// ----------------------------------------------------------------------------- floorplans

TEST(Floorplan, DeterministicPerSeed) {
    const auto a = generate_floorplan(1, 100, 100, 4);
    const auto b = generate_floorplan(1, 100, 100, 4);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, generate_floorplan(2, 100, 100, 4));
}

TEST(Floorplan, StructuralContract) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        for (int rooms : {1, 4, 8}) {
            const auto g = generate_floorplan(seed, 120, 90, rooms);
            ASSERT_EQ(g.width(), 120);
            ASSERT_EQ(g.height(), 90);
            // Outer wall.
            for (int x = 0; x < g.width(); ++x) {
                ASSERT_EQ(g(x, 0), CellState::Occupied);
                ASSERT_EQ(g(x, g.height() - 1), CellState::Occupied);
            }
            for (int y = 0; y < g.height(); ++y) {
                ASSERT_EQ(g(0, y), CellState::Occupied);
                ASSERT_EQ(g(g.width() - 1, y), CellState::Occupied);
            }
            ASSERT_EQ(count_state(g, CellState::Unknown), 0u);
            // Connectivity against an independent flood fill.
            std::set<std::pair<int, int>> free;
            for (int y = 0; y < g.height(); ++y)
                for (int x = 0; x < g.width(); ++x)
                    if (g(x, y) == CellState::Free) free.insert({x, y});
            ASSERT_FALSE(free.empty());
            std::set<std::pair<int, int>> seen{*free.begin()};
            std::vector<std::pair<int, int>> stack{*free.begin()};
            while (!stack.empty()) {
                auto [x, y] = stack.back();
                stack.pop_back();
                const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    std::pair<int, int> n{x + dx[k], y + dy[k]};
                    if (free.count(n) && seen.insert(n).second) stack.push_back(n);
                }
            }
            EXPECT_EQ(seen.size(), free.size()) << "seed " << seed << " rooms " << rooms;
        }
    }
}

TEST(Floorplan, InfeasibleParametersFailLoudly) {
    EXPECT_THROW(generate_floorplan(1, 40, 100, 2), LayoutError);
    EXPECT_THROW(generate_floorplan(1, 100, 100, 0), LayoutError);
    EXPECT_THROW(generate_floorplan(1, 50, 50, 40), LayoutError);
}

// ----------------------------------------------------------------------------- crop

TEST(CropCenter, UniformFieldStaysUniform) {
    ProbabilityGrid g(40, 30, 0.5);
    const auto c = crop_center(g, {20, 15}, 16);
    ASSERT_EQ(c.width(), 16);
    ASSERT_EQ(c.height(), 16);
    for (double v : c.cells()) EXPECT_EQ(v, 0.5);
}

TEST(CropCenter, CornerCropIsMostlyPadding) {
    ProbabilityGrid g(200, 200, 0.0);
    const auto c = crop_center(g, {0, 0}, 1600);
    std::size_t pad = 0;
    for (double v : c.cells()) pad += v == 0.5;
    // The map covers the 200x200 block at offset (800, 800): 40000 of 2560000 cells.
    EXPECT_EQ(pad, 1600u * 1600u - 200u * 200u);
    EXPECT_NEAR(static_cast<double>(pad) / (1600.0 * 1600.0), 0.984375, 1e-12);
}

TEST(CropCenter, CenteredFullCropIsACopy) {
    ProbabilityGrid g(10, 10);
    for (int i = 0; i < 100; ++i) g.data()[i] = i / 100.0;
    const auto c = crop_center(g, {5, 5}, 10);
    EXPECT_EQ(c.data(), g.data());
}

TEST(CropCenter, IndexMappingProperty) {
    flab::Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int w = 1 + static_cast<int>(rng.uniform_int(30)), h = 1 + static_cast<int>(rng.uniform_int(30));
        ProbabilityGrid g(w, h);
        for (auto& v : g.data()) v = rng.uniform();
        const Pose center{static_cast<int>(rng.uniform_int(60)) - 15, static_cast<int>(rng.uniform_int(60)) - 15};
        const int side = 1 + static_cast<int>(rng.uniform_int(40));
        const auto c = crop_center(g, center, side);
        ASSERT_EQ(c.size(), static_cast<std::size_t>(side) * side);
        for (int j = 0; j < side; ++j)
            for (int i = 0; i < side; ++i) {
                const int x = center.x - side / 2 + i, y = center.y - side / 2 + j;
                const double expect = g.in_bounds(x, y) ? g(x, y) : 0.5;
                ASSERT_EQ(c(i, j), expect);
            }
    }
    EXPECT_THROW(crop_center(ProbabilityGrid(2, 2), {0, 0}, 0), ContractViolation);
}
