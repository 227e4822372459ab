#include "frontier_lab/rl/policy_planners.hpp"

namespace flab::rl {

std::vector<float> primitive_features(const OccupancyGrid& observed, Pose robot, int step_cells, int budget_remaining,
                                      int budget_total) {
    std::vector<float> f(kPrimitiveFeatureSize, 0.0f);
    f[0] = budget_total > 0 ? static_cast<float>(budget_remaining) / static_cast<float>(budget_total) : 0.0f;
    for (int d = 0; d < kDirectionCount; ++d) {
        const Pose off = direction_offset(static_cast<Direction>(d));
        int free = 0, unknown = 0;
        for (int k = 1; k <= step_cells; ++k) {
            const int x = robot.x + off.x * k, y = robot.y + off.y * k;
            if (!observed.in_bounds(x, y)) continue;
            free += observed(x, y) == CellState::Free;
            unknown += observed(x, y) == CellState::Unknown;
        }
        f[1 + d] = static_cast<float>(free) / static_cast<float>(step_cells);
        f[1 + kDirectionCount + d] = static_cast<float>(unknown) / static_cast<float>(step_cells);
    }
    return f;
}

Observation primitive_observation(const PredictionBundle& bundle, const OccupancyGrid& observed, Pose robot,
                                  int step_cells, int budget_remaining, int budget_total, const PreprocessSpec& spec) {
    Observation obs;
    obs.image = preprocess_bundle(bundle, observed, robot, spec);
    obs.features = primitive_features(observed, robot, step_cells, budget_remaining, budget_total);
    obs.valid.assign(kDirectionCount, 1);
    return obs;
}

NetworkShape primitive_network_shape(const EncoderSpec& encoder, int hidden) {
    return {encoder, kPrimitiveFeatureSize, kDirectionCount, hidden};
}

NetworkShape frontier_network_shape(const EncoderSpec& encoder, int slot_count, int hidden) {
    return {encoder, FrontierFeatures::flat_size(slot_count), slot_count, hidden};
}

PlannerDecision primitive_planner(const SacAgent<float>& policy, const Observation& local_observation) {
    Rng unused;
    const int a = policy.act(local_observation, true, unused);
    return PrimitiveMove{static_cast<Direction>(a)};
}

PlannerDecision RlPlanner::decide(const PlanningContext& ctx) {
    if (ctx.view == nullptr || ctx.bundle == nullptr || ctx.observed == nullptr) {
        throw ContractViolation("rl planner needs a planning view, bundle and observed map");
    }
    const Observation obs = make_observation(*ctx.bundle, *ctx.observed, ctx.robot, *ctx.view, spec_);
    const int slot = agent_->act(obs, deterministic_, rng_);
    if (slot < 0) return NoAction{};
    return FrontierChoice{slot};
}

PlannerDecision PrimitivePlanner::decide(const PlanningContext& ctx) {
    if (ctx.bundle == nullptr || ctx.observed == nullptr) throw ContractViolation("primitive planner needs maps");
    return primitive_planner(*agent_, primitive_observation(*ctx.bundle, *ctx.observed, ctx.robot, ctx.step_cells,
                                                            ctx.budget_remaining, ctx.budget_total, spec_));
}

}  // namespace flab::rl
