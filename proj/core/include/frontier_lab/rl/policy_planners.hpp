#pragma once

#include <memory>

#include "frontier_lab/planners.hpp"
#include "frontier_lab/rl/observation.hpp"
#include "frontier_lab/rl/sac.hpp"

namespace flab::rl {

/// Budget fraction, then per direction the fraction of the next step_cells cells
/// known Free, then the fraction still Unknown.
inline constexpr int kPrimitiveFeatureSize = 1 + 2 * kDirectionCount;

std::vector<float> primitive_features(const OccupancyGrid& observed, Pose robot, int step_cells, int budget_remaining,
                                      int budget_total);

/// All eight directions are always valid; collisions are penalized, not masked.
Observation primitive_observation(const PredictionBundle& bundle, const OccupancyGrid& observed, Pose robot,
                                  int step_cells, int budget_remaining, int budget_total, const PreprocessSpec& spec);

NetworkShape primitive_network_shape(const EncoderSpec& encoder, int hidden);
NetworkShape frontier_network_shape(const EncoderSpec& encoder, int slot_count, int hidden);

/// Greedy readout of a primitive-motion policy.
PlannerDecision primitive_planner(const SacAgent<float>& policy, const Observation& local_observation);

/// Argmax readout of a trained frontier policy.
class RlPlanner final : public Planner {
public:
    RlPlanner(std::shared_ptr<const SacAgent<float>> agent, PreprocessSpec spec, bool deterministic = true,
              std::uint64_t seed = 0)
        : agent_(std::move(agent)), spec_(spec), deterministic_(deterministic), rng_(seed) {}
    std::string name() const override { return "rl"; }
    PlannerDecision decide(const PlanningContext& ctx) override;

private:
    std::shared_ptr<const SacAgent<float>> agent_;
    PreprocessSpec spec_;
    bool deterministic_;
    Rng rng_;
};

class PrimitivePlanner final : public Planner {
public:
    PrimitivePlanner(std::shared_ptr<const SacAgent<float>> agent, PreprocessSpec spec)
        : agent_(std::move(agent)), spec_(spec) {}
    std::string name() const override { return "primitive"; }
    bool uses_frontiers() const override { return false; }
    PlannerDecision decide(const PlanningContext& ctx) override;

private:
    std::shared_ptr<const SacAgent<float>> agent_;
    PreprocessSpec spec_;
};

}  // namespace flab::rl
