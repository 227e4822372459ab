#include <gtest/gtest.h>

#include <cmath>

#include "frontier_lab/scoring.hpp"
#include "support/oracles.hpp"

using namespace flab;

TEST(MinMax, Examples) {
    const std::vector<double> a{2, 4, 6};
    EXPECT_EQ(minmax_normalize(a), (std::vector<double>{0.0, 0.5, 1.0}));
    const std::vector<double> b{7, 7};
    EXPECT_EQ(minmax_normalize(b), (std::vector<double>{0.5, 0.5}));
    EXPECT_TRUE(minmax_normalize({}).empty());
}

TEST(MinMax, InvariantUnderPositiveAffineMaps) {
    Rng rng(1);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> raw(1 + rng.uniform_int(12));
        for (auto& v : raw) v = rng.uniform(-5, 5);
        const double scale = rng.uniform(0.01, 100), shift = rng.uniform(-50, 50);
        std::vector<double> moved;
        for (double v : raw) moved.push_back(scale * v + shift);
        const auto a = minmax_normalize(raw), b = minmax_normalize(moved);
        for (std::size_t i = 0; i < a.size(); ++i) {
            ASSERT_NEAR(a[i], b[i], 1e-9);
            ASSERT_GE(a[i], 0.0);
            ASSERT_LE(a[i], 1.0);
        }
        const auto arg = [](const std::vector<double>& v) { return std::max_element(v.begin(), v.end()) - v.begin(); };
        ASSERT_EQ(arg(raw), arg(moved));
    }
}

TEST(UtilityScore, HalfPlaneMatchesCellCount) {
    OccupancyGrid observed(500, 500, CellState::Unknown);
    for (int y = 0; y < 500; ++y)
        for (int x = 0; x < 250; ++x) observed(x, y) = CellState::Free;
    const Pose c{249, 250};
    const SensorConfig sensor{};
    // Cells right of the boundary within 200 cells of the center.
    double expect = 0;
    for (int y = 0; y < 500; ++y)
        for (int x = 250; x < 500; ++x) expect += std::hypot(x - c.x, y - c.y) <= 200.0;
    const double got = utility_score_raw(observed, c, sensor, 100.0);
    EXPECT_NEAR(got, expect / 100.0, 0.02 * expect / 100.0);
}

TEST(UtilityScore, KnownMaskScoresZeroAndDistanceScalesLinearly) {
    auto known = oracle::random_grid(40, 40, 3, 0.0, 0.2);
    const Pose c{20, 20};
    known[c] = CellState::Free;
    EXPECT_EQ(utility_score_raw(known, c, SensorConfig{360, 3.0}, 5.0), 0.0);

    auto g = oracle::random_grid(40, 40, 4, 0.5, 0.1);
    g[c] = CellState::Free;
    const double d = utility_score_raw(g, c, SensorConfig{360, 3.0}, 7.0);
    const double d2 = utility_score_raw(g, c, SensorConfig{360, 3.0}, 14.0);
    EXPECT_GT(d, 0.0);
    EXPECT_NEAR(d / d2, 2.0, 1e-12);
    // Distance floors at one cell.
    EXPECT_EQ(utility_score_raw(g, c, SensorConfig{360, 3.0}, 0.0), utility_score_raw(g, c, SensorConfig{360, 3.0}, 1.0));
}

TEST(PredictionScore, ClosedFormAndZeroVariance) {
    const SensorConfig sensor{720, 4.0};
    const ProbabilityGrid mean(60, 60, 0.0);
    const auto mask = visibility_mask(OccupancyGrid(60, 60, CellState::Free), {30, 30}, sensor);
    double m = 0;
    for (auto v : mask.cells()) m += v;
    const Grid<double> var(60, 60, 0.1);
    EXPECT_NEAR(prediction_score_raw(mean, var, {30, 30}, sensor, 7.0), 0.1 * m / 7.0, 1e-9);
    EXPECT_EQ(prediction_score_raw(mean, Grid<double>(60, 60, 0.0), {30, 30}, sensor, 7.0), 0.0);
}

namespace {

struct Scene {
    std::shared_ptr<OccupancyGrid> truth;
    OccupancyGrid observed;
    Pose robot;
};

Scene explored_scene(std::uint64_t seed, int senses) {
    Scene s;
    s.truth = std::make_shared<OccupancyGrid>(generate_floorplan(seed, 120, 120, 5));
    std::vector<Pose> free;
    for (int y = 0; y < 120; ++y)
        for (int x = 0; x < 120; ++x)
            if ((*s.truth)(x, y) == CellState::Free) free.push_back({x, y});
    Rng rng(seed);
    s.observed = OccupancyGrid(120, 120, CellState::Unknown);
    s.robot = free[rng.uniform_int(free.size())];
    sense_into(*s.truth, s.robot, SensorConfig{720, 6.0}, s.observed);
    for (int i = 1; i < senses; ++i) {
        // Later poses are taken from what has been seen so the robot stays in known space.
        std::vector<Pose> seen;
        for (Pose p : free)
            if (s.observed[p] == CellState::Free) seen.push_back(p);
        s.robot = seen[rng.uniform_int(seen.size())];
        sense_into(*s.truth, s.robot, SensorConfig{720, 6.0}, s.observed);
    }
    return s;
}

ScoringConfig small_cfg() {
    ScoringConfig cfg;
    cfg.sensor = SensorConfig{720, 6.0};
    cfg.window = 200;
    cfg.slot_count = 6;
    cfg.budget_total = 100;
    return cfg;
}

}  // namespace

TEST(ScoreFrontiers, VarianceOnlyWhereMaskMeetsUnknown) {
    const auto s = explored_scene(2, 3);
    const auto bundle = predict(s.observed, default_ensemble(), s.truth.get());
    auto frontiers = detect_frontiers(s.observed, 5);
    ASSERT_FALSE(frontiers.empty());
    score_frontiers(frontiers, s.observed, bundle, s.robot, small_cfg());
    for (const auto& f : frontiers) {
        EXPECT_TRUE(f.valid);
        EXPECT_GE(f.utility_score, 0.0);
        EXPECT_LE(f.utility_score, 1.0);
        EXPECT_GE(f.prediction_score, 0.0);
        EXPECT_LE(f.prediction_score, 1.0);
        EXPECT_NEAR(f.path_length, f.path_cells * s.observed.resolution(), 1e-9);
        if (f.variance_sum > 0.0) EXPECT_GT(f.unknown_count, 0.0);
    }
}

TEST(ScoreActionSet, SingleFrontierIsHalfAndPaddingIsZero) {
    OccupancyGrid observed(40, 40, CellState::Unknown);
    for (int y = 10; y < 30; ++y)
        for (int x = 5; x < 20; ++x) observed(x, y) = CellState::Free;
    for (int y = 10; y < 30; ++y) observed(5, y) = CellState::Occupied;
    for (int x = 5; x < 20; ++x) {
        observed(x, 10) = CellState::Occupied;
        observed(x, 29) = CellState::Occupied;
    }
    const std::vector<PredictorKind> null_ens{NullPredictor{}};
    const auto bundle = predict(observed, null_ens);
    auto cfg = small_cfg();
    const auto view = compute_planning_view(observed, bundle, {10, 20}, 60, cfg);
    ASSERT_EQ(view.actions.valid_count(), 1);
    const auto& f = view.features.slots;
    ASSERT_EQ(f.size(), 6u);
    EXPECT_EQ(f[0].utility, 0.5);
    EXPECT_EQ(f[0].prediction, 0.5);
    EXPECT_NEAR(view.features.budget_norm, 0.6, 1e-12);
    EXPECT_NEAR(f[0].dx, (view.actions.slots[0].center.x - 10) / 100.0, 1e-12);
    EXPECT_NEAR(f[0].traj_norm, view.actions.slots[0].path_length / cfg.budget_meters(0.1), 1e-12);
    for (int i = 1; i < 6; ++i) {
        EXPECT_EQ(f[i].dx, 0.0);
        EXPECT_EQ(f[i].dy, 0.0);
        EXPECT_EQ(f[i].utility, 0.0);
        EXPECT_EQ(f[i].prediction, 0.0);
        EXPECT_EQ(f[i].traj_norm, 0.0);
    }
    const auto flat = view.features.flatten();
    ASSERT_EQ(flat.size(), static_cast<std::size_t>(FrontierFeatures::flat_size(6)));
    // Layout: centers, utilities, predictions, trajectories, budget.
    EXPECT_FLOAT_EQ(flat[0], static_cast<float>(f[0].dx));
    EXPECT_FLOAT_EQ(flat[1], static_cast<float>(f[0].dy));
    EXPECT_FLOAT_EQ(flat[12], 0.5f);
    EXPECT_FLOAT_EQ(flat[18], 0.5f);
    EXPECT_FLOAT_EQ(flat[24], static_cast<float>(f[0].traj_norm));
    EXPECT_FLOAT_EQ(flat[30], 0.6f);
}

TEST(ScoreActionSet, DeterministicAndFiniteOnRandomEpisodes) {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const auto s = explored_scene(seed, 1 + static_cast<int>(seed % 4));
        const auto bundle = predict(s.observed, default_ensemble(), s.truth.get());
        const auto cfg = small_cfg();
        const int br = static_cast<int>(seed * 7 % 101);
        const auto a = compute_planning_view(s.observed, bundle, s.robot, br, cfg);
        const auto b = compute_planning_view(s.observed, bundle, s.robot, br, cfg);
        ASSERT_EQ(a.features.flatten(), b.features.flatten());
        for (float v : a.features.flatten()) ASSERT_TRUE(std::isfinite(v));
        for (int i = 0; i < a.actions.capacity(); ++i) {
            const auto& sf = a.features.slots[i];
            ASSERT_GE(sf.dx, -1.0);
            ASSERT_LE(sf.dx, 1.0);
            ASSERT_GE(sf.dy, -1.0);
            ASSERT_LE(sf.dy, 1.0);
            ASSERT_GE(sf.traj_norm, 0.0);
            if (i >= a.actions.valid_count()) ASSERT_FALSE(a.actions.is_valid(i));
            else ASSERT_TRUE(a.actions.is_valid(i));
        }
        ASSERT_GE(a.features.budget_norm, 0.0);
        ASSERT_LE(a.features.budget_norm, 1.0);
        // Valid slots sorted by prediction score.
        for (int i = 1; i < a.actions.valid_count(); ++i)
            ASSERT_GE(a.actions.slots[i - 1].prediction_score, a.actions.slots[i].prediction_score);
    }
}

TEST(ScoreActionSet, ExcludedCentersAreSkipped) {
    const auto s = explored_scene(5, 2);
    const auto bundle = predict(s.observed, default_ensemble(), s.truth.get());
    const auto cfg = small_cfg();
    const auto a = compute_planning_view(s.observed, bundle, s.robot, 50, cfg);
    ASSERT_GT(a.actions.valid_count(), 0);
    const Pose banned = a.actions.slots[0].center;
    const std::vector<Pose> excluded{banned};
    const auto b = compute_planning_view(s.observed, bundle, s.robot, 50, cfg, excluded);
    for (int i = 0; i < b.actions.valid_count(); ++i) EXPECT_NE(b.actions.slots[i].center, banned);
}
