#pragma once

#include <filesystem>
#include <memory>
#include <ostream>
#include <vector>

#include "frontier_lab/episode.hpp"
#include "frontier_lab/rl/sac.hpp"
#include "frontier_lab/rl/trainer.hpp"

namespace flab {

/// Training environment over a fixed map set. Each reset draws a map and a start
/// pose from the episode seed. Frontier mode pays the sparse terminal reward;
/// primitive mode pays per new cell and per collision.
class ExplorationEnv final : public rl::Environment {
public:
    ExplorationEnv(EpisodeConfig cfg, std::vector<std::shared_ptr<const OccupancyGrid>> maps, bool primitive_actions);

    rl::Observation reset(std::uint64_t episode_seed) override;
    bool terminal() const override { return episode_->terminal(); }
    rl::StepOutcome step(int action) override;
    rl::EpisodeInfo info() const override;

    const Episode& episode() const { return *episode_; }
    int action_count() const { return primitive_ ? kDirectionCount : cfg_.slot_count; }
    int feature_size() const;

private:
    rl::Observation observe() const;

    EpisodeConfig cfg_;
    std::vector<std::shared_ptr<const OccupancyGrid>> maps_;
    bool primitive_;
    std::unique_ptr<Episode> episode_;
    double reward_sum_ = 0.0;
    int decisions_ = 0;
};

struct TrainingJob {
    EpisodeConfig base;
    std::vector<MapSource> maps;
    rl::SacConfig sac;
    bool primitive = false;
    long steps = 10000;
    std::uint64_t seed = 0;
    std::filesystem::path checkpoint;  // empty: keep the agent in memory only
    long checkpoint_every = 0;
    std::ostream* log = nullptr;
    std::function<void(const rl::TrainingLogRecord&)> on_episode;
};

struct TrainingOutcome {
    std::unique_ptr<rl::SacAgent<float>> agent;
    rl::TrainSummary summary;
};

/// Network shape implied by the episode config (preprocess output side and channels).
rl::NetworkShape training_network_shape(const EpisodeConfig& cfg, bool primitive);

/// Builds the environment and agent for `job` and trains. The checkpoint carries
/// the preprocessing spec so planners can rebuild observations from it alone.
TrainingOutcome run_training(const TrainingJob& job);

}  // namespace flab
