#include "frontier_lab/exploration_env.hpp"

#include "frontier_lab/rl/policy_planners.hpp"

namespace flab {

ExplorationEnv::ExplorationEnv(EpisodeConfig cfg, std::vector<std::shared_ptr<const OccupancyGrid>> maps,
                               bool primitive_actions)
    : cfg_(std::move(cfg)), maps_(std::move(maps)), primitive_(primitive_actions) {
    if (maps_.empty()) throw ConfigError("training needs at least one map");
    cfg_.validate();
}

int ExplorationEnv::feature_size() const {
    return primitive_ ? rl::kPrimitiveFeatureSize : FrontierFeatures::flat_size(cfg_.slot_count);
}

rl::Observation ExplorationEnv::observe() const {
    const Episode& ep = *episode_;
    const EpisodeState& s = ep.state();
    if (primitive_) {
        auto obs = rl::primitive_observation(ep.bundle(), s.observed, s.pose, cfg_.step_cells, s.budget_remaining,
                                             s.budget_total, cfg_.preprocess);
        if (ep.terminal()) std::fill(obs.valid.begin(), obs.valid.end(), 0);
        return obs;
    }
    rl::Observation obs;
    obs.image = rl::preprocess_bundle(ep.bundle(), s.observed, s.pose, cfg_.preprocess);
    if (ep.terminal()) {
        obs.features.assign(FrontierFeatures::flat_size(cfg_.slot_count), 0.0f);
        obs.valid.assign(cfg_.slot_count, 0);
    } else {
        obs.features = ep.view().features.flatten();
        const auto mask = ep.view().actions.valid_mask();
        obs.valid.assign(mask.begin(), mask.end());
    }
    return obs;
}

rl::Observation ExplorationEnv::reset(std::uint64_t episode_seed) {
    Rng rng(episode_seed);
    const auto& truth = maps_[rng.uniform_int(maps_.size())];
    const Pose start = sample_start_poses(*truth, 1, rng.next(), cfg_.start_margin_m)[0];
    EpisodeConfig cfg = cfg_;
    cfg.seed = episode_seed;
    episode_ = std::make_unique<Episode>(cfg, truth, start, !primitive_, primitive_ ? "primitive" : "rl");
    reward_sum_ = 0.0;
    decisions_ = 0;
    if (!primitive_ && !episode_->terminal() && episode_->view().actions.valid_count() == 0) {
        episode_->apply(NoAction{});
    }
    return observe();
}

rl::StepOutcome ExplorationEnv::step(int action) {
    if (!episode_ || episode_->terminal()) throw ContractViolation("step on a finished episode");
    rl::StepOutcome out;
    ++decisions_;
    if (primitive_) {
        if (action < 0 || action >= kDirectionCount) throw ContractViolation("primitive action out of range");
        const StepRecord& rec = episode_->apply(PrimitiveMove{static_cast<Direction>(action)});
        out.reward = cfg_.primitive_reward.new_cell * static_cast<double>(rec.new_cells) +
                     (rec.collision ? cfg_.primitive_reward.collision : 0.0);
    } else {
        episode_->apply(FrontierChoice{action});
        // No frontier left to choose means the episode is over.
        if (!episode_->terminal() && episode_->view().actions.valid_count() == 0) episode_->apply(NoAction{});
        if (episode_->terminal()) {
            out.reward = training_reward(episode_->iou(), episode_->state().budget_remaining, true);
        }
    }
    out.done = episode_->terminal();
    reward_sum_ += out.reward;
    out.next = observe();
    return out;
}

rl::EpisodeInfo ExplorationEnv::info() const {
    if (!episode_) return {};
    double reward = reward_sum_;
    // An episode that ended before its first decision still earns its terminal reward.
    if (!primitive_ && decisions_ == 0 && episode_->terminal()) {
        reward = training_reward(episode_->iou(), episode_->state().budget_remaining, true);
    }
    return {episode_->iou(), episode_->state().budget_remaining, reward};
}

rl::NetworkShape training_network_shape(const EpisodeConfig& cfg, bool primitive) {
    rl::EncoderSpec enc = cfg.encoder;
    enc.input_side = cfg.preprocess.output_side();
    enc.input_channels = cfg.preprocess.channels;
    return primitive ? rl::primitive_network_shape(enc, cfg.hidden)
                     : rl::frontier_network_shape(enc, cfg.slot_count, cfg.hidden);
}

TrainingOutcome run_training(const TrainingJob& job) {
    job.sac.validate();
    std::vector<std::shared_ptr<const OccupancyGrid>> truths;
    nlohmann::json map_ids = nlohmann::json::array();
    for (const auto& m : job.maps) {
        truths.push_back(load_truth(m));
        map_ids.push_back(m.id());
    }
    EpisodeConfig cfg = job.base;
    cfg.planner = job.primitive ? "primitive" : "rl";
    ExplorationEnv env(cfg, std::move(truths), job.primitive);

    TrainingOutcome out;
    out.agent = std::make_unique<rl::SacAgent<float>>(training_network_shape(cfg, job.primitive), job.sac, job.seed);
    rl::TrainOptions opt;
    opt.total_steps = job.steps;
    opt.seed = job.seed;
    opt.checkpoint_every = job.checkpoint_every;
    opt.checkpoint_path = job.checkpoint;
    opt.checkpoint_extra = {{"preprocess", cfg.preprocess},
                            {"planner", cfg.planner},
                            {"slot_count", cfg.slot_count},
                            {"maps", map_ids},
                            {"seed", job.seed}};
    opt.log = job.log;
    opt.on_episode = job.on_episode;
    out.summary = rl::train(env, *out.agent, opt);
    return out;
}

}  // namespace flab
