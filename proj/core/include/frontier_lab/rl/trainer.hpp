#pragma once

#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <ostream>

#include "frontier_lab/rl/sac.hpp"

namespace flab::rl {

/// End-of-episode numbers reported by an environment.
struct EpisodeInfo {
    double iou = 0.0;
    int budget_remaining = 0;
    double reward = 0.0;  // sum of rewards over the episode
};

struct StepOutcome {
    Observation next;
    double reward = 0.0;
    bool done = false;
};

/// Decision-level environment: one step is one planning decision.
class Environment {
public:
    virtual ~Environment() = default;
    virtual Observation reset(std::uint64_t episode_seed) = 0;
    /// True when the episode ended before any decision could be made.
    virtual bool terminal() const = 0;
    virtual StepOutcome step(int action) = 0;
    virtual EpisodeInfo info() const = 0;
};

struct TrainingLogRecord {
    long episode = 0;
    long steps = 0;  // decisions taken in this episode
    double iou = 0.0;
    int b_r = 0;
    double reward = 0.0;
    long wall_ms = 0;
};

void to_json(nlohmann::json& j, const TrainingLogRecord& r);

struct TrainOptions {
    long total_steps = 10000;
    std::uint64_t seed = 0;
    /// Checkpoint every this many steps (0: only at the end) when a path is set.
    long checkpoint_every = 0;
    std::filesystem::path checkpoint_path;
    nlohmann::json checkpoint_extra;
    /// One JSON line per finished episode.
    std::ostream* log = nullptr;
    std::function<void(const TrainingLogRecord&)> on_episode;
};

struct TrainSummary {
    long steps = 0;
    long episodes = 0;
    long updates = 0;
    SacDiagnostics last;
};

/// Single-threaded interaction loop; identical seeds give identical logs apart
/// from wall_ms.
TrainSummary train(Environment& env, SacAgent<float>& agent, const TrainOptions& opt);

}  // namespace flab::rl
