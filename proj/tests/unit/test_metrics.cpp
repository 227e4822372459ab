#include <gtest/gtest.h>

#include <deque>

#include "frontier_lab/metrics.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace flab;
using fixtures::shifted;
using fixtures::wall_map;

namespace {

// Border-reachable non-Occupied cells by BFS; the footprint is everything else.
std::vector<std::uint8_t> footprint_oracle(const OccupancyGrid& g) {
    const int w = g.width(), h = g.height();
    std::vector<std::uint8_t> outside(g.size(), 0);
    std::deque<std::pair<int, int>> q;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if ((x == 0 || y == 0 || x == w - 1 || y == h - 1) && g(x, y) != CellState::Occupied) {
                outside[y * w + x] = 1;
                q.push_back({x, y});
            }
    while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop_front();
        const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int nx = x + dx[k], ny = y + dy[k];
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (outside[ny * w + nx] || g(nx, ny) == CellState::Occupied) continue;
            outside[ny * w + nx] = 1;
            q.push_back({nx, ny});
        }
    }
    for (auto& v : outside) v = !v;
    return outside;
}

}  // namespace

TEST(Rewards, Examples) {
    EXPECT_EQ(training_reward(0.95, 100, true), 650.0);
    EXPECT_EQ(training_reward(0.30, 0, true), 0.0);
    EXPECT_EQ(training_reward(0.90, 250, false), 0.0);
    EXPECT_EQ(study_reward(0.95, 274), 1224.0);
    EXPECT_EQ(study_reward(1.0, 0), 1000.0);
    EXPECT_EQ(study_reward(0.0, 500), 500.0);
}

TEST(Rewards, TrainingRewardRange) {
    Rng rng(2);
    for (int i = 0; i < 2000; ++i) {
        const double iou = rng.uniform();
        const int br = static_cast<int>(rng.uniform_int(501));
        const double r = training_reward(iou, br, true);
        ASSERT_GE(r, 0.0);
        ASSERT_LE(r, 600.0 + 500);
        ASSERT_EQ(training_reward(iou, br, false), 0.0);
    }
}

TEST(DilatedIoU, ShiftTolerance) {
    const auto truth = wall_map();
    const OccupancyGrid observed(100, 100, CellState::Unknown);
    for (auto [dx, dy] : std::vector<std::pair<int, int>>{{2, 0}, {0, 2}, {-2, 0}, {2, 2}, {-2, 1}}) {
        const auto r = dilated_iou(shifted(truth, dx, dy), observed, truth);
        EXPECT_EQ(r.fn, 0);
        EXPECT_EQ(r.fp, 0);
        EXPECT_EQ(r.iou, 1.0) << dx << "," << dy;
    }
    for (auto [dx, dy] : std::vector<std::pair<int, int>>{{3, 0}, {0, -3}, {3, 3}}) {
        EXPECT_LT(dilated_iou(shifted(truth, dx, dy), observed, truth).iou, 1.0) << dx << "," << dy;
    }
}

TEST(DilatedIoU, IdentityAndEmpty) {
    const auto truth = wall_map();
    const OccupancyGrid observed(100, 100, CellState::Unknown);
    EXPECT_EQ(dilated_iou(to_probability(truth), observed, truth).iou, 1.0);
    const auto empty = dilated_iou(ProbabilityGrid(100, 100, 0.0), observed, truth);
    EXPECT_EQ(empty.tp, 0);
    EXPECT_EQ(empty.iou, 0.0);
    // Fully observed: the prediction is ignored.
    EXPECT_EQ(dilated_iou(ProbabilityGrid(100, 100, 0.0), truth, truth).iou, 1.0);
    const OccupancyGrid free(10, 10, CellState::Free);
    EXPECT_EQ(dilated_iou(ProbabilityGrid(10, 10, 0.0), free, free).iou, 1.0);
    EXPECT_THROW(dilated_iou(ProbabilityGrid(9, 10, 0.0), free, free), ContractViolation);
}

TEST(DilatedIoU, CountsMatchFormulaOnRandomInputs) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto truth = generate_floorplan(seed, 60, 50, 3);
        const auto observed = oracle::random_grid(60, 50, seed, 0.6, 0.0);
        auto obs = observed;
        for (std::size_t i = 0; i < obs.size(); ++i)
            if (obs.data()[i] != CellState::Unknown) obs.data()[i] = truth.data()[i];
        Rng rng(seed);
        ProbabilityGrid mean(60, 50);
        for (auto& v : mean.data()) v = rng.uniform();
        const auto r = dilated_iou(mean, obs, truth);

        const int w = 60, h = 50;
        std::vector<std::uint8_t> pm(w * h), g(w * h);
        for (int i = 0; i < w * h; ++i) {
            pm[i] = obs.data()[i] == CellState::Unknown ? mean.data()[i] >= 0.5 : obs.data()[i] == CellState::Occupied;
            g[i] = truth.data()[i] == CellState::Occupied;
        }
        const auto fp_mask = footprint_oracle(truth);
        const auto pd = oracle::dilate(pm, w, h, 2), gd = oracle::dilate(g, w, h, 2);
        long tp = 0, fp = 0, fn = 0;
        for (int i = 0; i < w * h; ++i) {
            tp += pd[i] && g[i];
            fp += pm[i] && fp_mask[i] && !gd[i];
            fn += !pd[i] && g[i];
        }
        ASSERT_EQ(r.tp, tp);
        ASSERT_EQ(r.fp, fp);
        ASSERT_EQ(r.fn, fn);
        ASSERT_DOUBLE_EQ(r.iou, static_cast<double>(tp) / (tp + fp + fn));
        const IoUEvaluator eval(truth);
        ASSERT_EQ(eval.iou(mean, obs), r.iou);
    }
}

TEST(DilatedIoU, PredictionsOutsideTheBuildingAreIgnored) {
    const auto truth = wall_map();
    const OccupancyGrid observed(100, 100, CellState::Unknown);
    auto pred = to_probability(truth);
    const auto base = dilated_iou(pred, observed, truth);
    for (int x = 0; x < 15; ++x) pred(x, 5) = 1.0;
    const auto noisy = dilated_iou(pred, observed, truth);
    EXPECT_EQ(noisy.fp, base.fp);
    EXPECT_EQ(noisy.iou, base.iou);
    // A false wall inside the shell does count.
    pred(35, 70) = 1.0;
    EXPECT_EQ(dilated_iou(pred, observed, truth).fp, base.fp + 1);
}

TEST(Footprint, RingAndInterior) {
    OccupancyGrid g(20, 20, CellState::Free);
    for (int i = 4; i <= 15; ++i) g(i, 4) = g(i, 15) = g(4, i) = g(15, i) = CellState::Occupied;
    const auto fp = footprint(g);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x) EXPECT_EQ(fp(x, y), x >= 4 && x <= 15 && y >= 4 && y <= 15) << x << "," << y;
    EXPECT_EQ(footprint(OccupancyGrid(8, 8, CellState::Free)).data(), std::vector<std::uint8_t>(64, 0));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = oracle::random_grid(30, 30, seed, 0.2, 0.35);
        ASSERT_EQ(footprint(r).data(), footprint_oracle(r)) << seed;
        ASSERT_EQ(footprint(r), footprint(r));
    }
}

TEST(Dilate, MatchesBruteForce) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(seed);
        const int w = 5 + static_cast<int>(rng.uniform_int(30)), h = 5 + static_cast<int>(rng.uniform_int(30));
        BinaryGrid g(w, h, 0);
        for (auto& v : g.data()) v = rng.uniform() < 0.1;
        for (int k : {1, 3, 5, 7}) {
            const auto d = dilate(g, k);
            ASSERT_EQ(d.data(), oracle::dilate(g.data(), w, h, k / 2)) << seed << " k=" << k;
            for (std::size_t i = 0; i < g.size(); ++i) ASSERT_GE(d.data()[i], g.data()[i]);
        }
        ASSERT_EQ(dilate(g, 1), g);
    }
    EXPECT_THROW(dilate(BinaryGrid(3, 3), 4), ContractViolation);
    EXPECT_THROW(dilate(BinaryGrid(3, 3), 0), ContractViolation);
}
