#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "frontier_lab/episode.hpp"
#include "frontier_lab/planners.hpp"
#include "frontier_lab/rl/policy_planners.hpp"

using namespace flab;

namespace {

Frontier slot(Pose c, double unknown = 0, double variance = 0) {
    Frontier f;
    f.center = c;
    f.members = {c};
    f.size = 5;
    f.valid = true;
    f.scored = true;
    f.unknown_count = unknown;
    f.variance_sum = variance;
    return f;
}

ActionSet padded(std::vector<Frontier> valid, int n = 10) {
    ActionSet s;
    s.slots = std::move(valid);
    s.slots.resize(n);
    return s;
}

}  // namespace

TEST(Nearest, Examples) {
    const Pose robot{0, 0};
    EXPECT_EQ(nearest_frontier(padded({slot({100, 0}), slot({30, 0}), slot({70, 0})}), robot),
              PlannerDecision(FrontierChoice{1}));
    EXPECT_EQ(nearest_frontier(padded({slot({5, 5})}), robot), PlannerDecision(FrontierChoice{0}));
    EXPECT_EQ(nearest_frontier(padded({slot({0, 20}), slot({50, 50}), slot({20, 0})}), robot),
              PlannerDecision(FrontierChoice{0}));
    EXPECT_EQ(nearest_frontier(padded({}), robot), PlannerDecision(NoAction{}));
}

TEST(Mapex, CoverageOnlyWhenVarianceVanishes) {
    const Pose robot{0, 0};
    // Coverage per distance: 100/10, 150/30, 90/5 -> slot 2.
    const auto set = padded({slot({10, 0}, 100), slot({30, 0}, 150), slot({0, 5}, 90)});
    EXPECT_EQ(mapex_planner(set, robot), PlannerDecision(FrontierChoice{2}));
}

TEST(Mapex, FarHighVarianceWins) {
    const Pose robot{0, 0};
    // Near: (20 + 5) / 10 = 2.5. Far: (20 + 50 * 10) / 40 = 13.
    const auto set = padded({slot({10, 0}, 20, 5), slot({40, 0}, 20, 500)});
    EXPECT_EQ(mapex_planner(set, robot), PlannerDecision(FrontierChoice{1}));
    EXPECT_EQ(mapex_planner(set, robot, MapexParams{0.0}), PlannerDecision(FrontierChoice{0}));
}

TEST(Mapex, ArgmaxInvariantUnderScaling) {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Frontier> a, b;
        const double c = rng.uniform(0.1, 10);
        for (int i = 0; i < 6; ++i) {
            const Pose p{static_cast<int>(rng.uniform_int(100)), static_cast<int>(rng.uniform_int(100))};
            const double u = rng.uniform(0, 100), v = rng.uniform(0, 100);
            a.push_back(slot(p, u, v));
            b.push_back(slot(p, c * u, c * v));
        }
        ASSERT_EQ(mapex_planner(padded(a), {50, 50}), mapex_planner(padded(b), {50, 50}));
    }
}

TEST(Mapex, AllZeroFallsBackToNearest) {
    const auto set = padded({slot({40, 0}), slot({3, 0}), slot({20, 0})});
    EXPECT_EQ(mapex_planner(set, {0, 0}), PlannerDecision(FrontierChoice{1}));
    EXPECT_EQ(mapex_planner(padded({}), {0, 0}), PlannerDecision(NoAction{}));
}

TEST(Random, UniformOverTenSlots) {
    std::vector<Frontier> v;
    for (int i = 0; i < 10; ++i) v.push_back(slot({i, 0}));
    const auto set = padded(v);
    Rng rng(42);
    std::vector<int> counts(10, 0);
    const int n = 10000;
    for (int i = 0; i < n; ++i) ++counts[std::get<FrontierChoice>(random_planner(set, rng)).slot];
    const double sigma = std::sqrt(n * 0.1 * 0.9);
    for (int c : counts) EXPECT_LT(std::abs(c - n * 0.1), 5 * sigma);
}

TEST(Random, SingleSlotAndDeterminism) {
    const auto one = padded({slot({1, 1})});
    Rng r(1);
    for (int i = 0; i < 50; ++i) EXPECT_EQ(random_planner(one, r), PlannerDecision(FrontierChoice{0}));
    std::vector<Frontier> v;
    for (int i = 0; i < 7; ++i) v.push_back(slot({i, 0}));
    const auto set = padded(v);
    Rng a(9), b(9);
    for (int i = 0; i < 100; ++i) ASSERT_EQ(random_planner(set, a), random_planner(set, b));
    EXPECT_EQ(random_planner(padded({}), a), PlannerDecision(NoAction{}));
}

TEST(Planners, NeverSelectPadding) {
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Frontier> v;
        const int k = static_cast<int>(rng.uniform_int(11));
        for (int i = 0; i < k; ++i)
            v.push_back(slot({static_cast<int>(rng.uniform_int(50)), static_cast<int>(rng.uniform_int(50))},
                             rng.uniform(0, 10), rng.uniform(0, 10)));
        const auto set = padded(v);
        for (const auto& d : {nearest_frontier(set, {25, 25}), mapex_planner(set, {25, 25}), random_planner(set, rng)}) {
            if (k == 0) {
                ASSERT_TRUE(std::holds_alternative<NoAction>(d));
            } else {
                ASSERT_TRUE(set.is_valid(std::get<FrontierChoice>(d).slot));
            }
        }
    }
}

TEST(HumanRelay, Validation) {
    std::vector<Frontier> v;
    for (int i = 0; i < 5; ++i) v.push_back(slot({i, 0}));
    const auto set = padded(v);
    EXPECT_EQ(human_relay(set, 3), std::optional<PlannerDecision>(FrontierChoice{3}));
    EXPECT_FALSE(human_relay(set, 7));
    EXPECT_FALSE(human_relay(set, -1));
    EXPECT_FALSE(human_relay(set, 10));
}

TEST(HumanRelay, BlocksUntilAValidPost) {
    std::vector<Frontier> v;
    for (int i = 0; i < 4; ++i) v.push_back(slot({i, 0}));
    PlanningView view;
    view.actions = padded(v);
    PlanningContext ctx;
    ctx.view = &view;
    HumanRelayPlanner relay;
    EXPECT_EQ(relay.post(1), HumanRelayPlanner::PostResult::NotAwaiting);
    PlannerDecision got;
    std::thread t([&] { got = relay.decide(ctx); });
    while (!relay.awaiting()) std::this_thread::yield();
    EXPECT_EQ(relay.post(8), HumanRelayPlanner::PostResult::Invalid);
    EXPECT_TRUE(relay.awaiting());
    EXPECT_EQ(relay.post(2), HumanRelayPlanner::PostResult::Accepted);
    t.join();
    EXPECT_EQ(got, PlannerDecision(FrontierChoice{2}));

    std::thread t2([&] { got = relay.decide(ctx); });
    while (!relay.awaiting()) std::this_thread::yield();
    relay.close();
    t2.join();
    EXPECT_EQ(got, PlannerDecision(NoAction{}));
    EXPECT_EQ(relay.post(0), HumanRelayPlanner::PostResult::Closed);
}

TEST(HumanRelay, ScriptedChoicesSkipInvalidOnes) {
    std::vector<Frontier> v;
    for (int i = 0; i < 3; ++i) v.push_back(slot({i, 0}));
    PlanningView view;
    view.actions = padded(v);
    PlanningContext ctx;
    ctx.view = &view;
    HumanRelayPlanner relay(std::deque<int>{9, 1, 2});
    EXPECT_EQ(relay.decide(ctx), PlannerDecision(FrontierChoice{1}));
    EXPECT_EQ(relay.decide(ctx), PlannerDecision(FrontierChoice{2}));
    EXPECT_EQ(relay.rejected_scripted(), 1);
}

// ----------------------------------------------------------------------------- primitive

namespace {

EpisodeConfig primitive_config() {
    EpisodeConfig cfg;
    cfg.planner = "primitive";
    cfg.budget = 20;
    cfg.sensor = SensorConfig{720, 4.0};
    cfg.predictors = {NullPredictor{}};
    cfg.preprocess = rl::PreprocessSpec{64, 16, 1, 1};
    cfg.encoder = rl::EncoderSpec::miniature(16);
    cfg.encoder.input_side = 16;
    cfg.hidden = 32;
    cfg.window = 200;
    return cfg;
}

std::shared_ptr<const OccupancyGrid> box(int w, int h) {
    auto g = std::make_shared<OccupancyGrid>(w, h, CellState::Free);
    for (int x = 0; x < w; ++x) (*g)(x, 0) = (*g)(x, h - 1) = CellState::Occupied;
    for (int y = 0; y < h; ++y) (*g)(0, y) = (*g)(w - 1, y) = CellState::Occupied;
    return g;
}

}  // namespace

TEST(Primitive, CollisionCostsBudgetWithoutMoving) {
    Episode ep(primitive_config(), box(150, 40), {1, 20}, false, "primitive");
    ASSERT_FALSE(ep.terminal());
    const auto& rec = ep.apply(PrimitiveMove{Direction::W});
    EXPECT_TRUE(rec.collision);
    EXPECT_EQ(ep.state().pose, (Pose{1, 20}));
    EXPECT_EQ(ep.state().budget_remaining, 19);
    EXPECT_EQ(rec.timesteps, 1);
}

TEST(Primitive, OpenMoveTravelsOneStep) {
    auto cfg = primitive_config();
    Episode ep(cfg, box(60, 60), {10, 30}, false, "primitive");
    const auto& rec = ep.apply(PrimitiveMove{Direction::E});
    EXPECT_FALSE(rec.collision);
    EXPECT_EQ(ep.state().pose, (Pose{10 + cfg.step_cells, 30}));
    EXPECT_GT(rec.new_cells, 0u);
    EXPECT_EQ(ep.state().budget_remaining, 19);
}

TEST(Primitive, FeaturesSeeWalls) {
    const auto truth = box(30, 30);
    const auto f = rl::primitive_features(*truth, {1, 15}, 6, 10, 20);
    ASSERT_EQ(f.size(), static_cast<std::size_t>(rl::kPrimitiveFeatureSize));
    EXPECT_FLOAT_EQ(f[0], 0.5f);
    // West is blocked at once, east is open.
    EXPECT_FLOAT_EQ(f[1 + static_cast<int>(Direction::W)], 0.0f);
    EXPECT_FLOAT_EQ(f[1 + static_cast<int>(Direction::E)], 1.0f);
}

TEST(Primitive, UntrainedPolicyIsDeterministic) {
    auto cfg = primitive_config();
    cfg.seed = 11;
    auto run = [&] {
        Episode ep(cfg, box(50, 50), {25, 25}, false, "primitive");
        auto planner = make_planner(cfg);
        return run_episode(ep, *planner);
    };
    const auto a = run(), b = run();
    EXPECT_EQ(a.trajectory, b.trajectory);
    nlohmann::json ja = a, jb = b;
    EXPECT_EQ(ja.dump(), jb.dump());
    for (const auto& s : a.steps) EXPECT_GE(s.direction, 0);
}

TEST(Direction, OffsetsAndNames) {
    EXPECT_EQ(direction_offset(Direction::NW), (Pose{-1, -1}));
    EXPECT_EQ(direction_offset(Direction::S), (Pose{0, 1}));
    EXPECT_EQ(to_string(Direction::SE), "SE");
    EXPECT_EQ(describe(PlannerDecision(FrontierChoice{4})), "frontier 4");
    EXPECT_EQ(describe(PlannerDecision(PrimitiveMove{Direction::E})), "move E");
    EXPECT_EQ(describe(PlannerDecision(NoAction{})), "none");
}
