#include "frontier_lab/rl/trainer.hpp"

#include <chrono>

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

#include "frontier_lab/rl/checkpoint.hpp"

namespace flab::rl {

void to_json(nlohmann::json& j, const TrainingLogRecord& r) {
    j = {{"episode", r.episode}, {"steps", r.steps},   {"iou", r.iou},
         {"b_r", r.b_r},         {"reward", r.reward}, {"wall_ms", r.wall_ms}};
}

namespace {

// Denormal activations late in training make float updates several times slower.
class FlushDenormals {
public:
#if defined(__SSE__)
    FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040); }  // FTZ | DAZ
    ~FlushDenormals() { _mm_setcsr(saved_); }

private:
    unsigned saved_;
#endif
};

}  // namespace

TrainSummary train(Environment& env, SacAgent<float>& agent, const TrainOptions& opt) {
    using Clock = std::chrono::steady_clock;
    const FlushDenormals flush;
    const SacConfig& cfg = agent.config();
    ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
    Rng act_rng(mix64(opt.seed ^ 0xa5a5a5a5ULL));
    Rng sample_rng(mix64(opt.seed + 17));
    TrainSummary summary;

    auto finish_episode = [&](long steps, Clock::time_point started) {
        const EpisodeInfo info = env.info();
        TrainingLogRecord rec{summary.episodes, steps, info.iou, info.budget_remaining, info.reward,
                              std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started).count()};
        ++summary.episodes;
        if (opt.log) *opt.log << nlohmann::json(rec).dump() << '\n' << std::flush;
        if (opt.on_episode) opt.on_episode(rec);
    };
    auto checkpoint = [&] {
        if (!opt.checkpoint_path.empty()) save_checkpoint(agent, opt.checkpoint_path, opt.checkpoint_extra);
    };

    int empty_resets = 0;
    while (summary.steps < opt.total_steps) {
        const auto started = Clock::now();
        auto obs = std::make_shared<const Observation>(env.reset(hash_combine(opt.seed, summary.episodes)));
        if (env.terminal()) {
            finish_episode(0, started);
            if (++empty_resets > 100) throw ContractViolation("environment keeps starting in a terminal state");
            continue;
        }
        empty_resets = 0;
        long ep_steps = 0;
        bool done = false;
        while (!done && summary.steps < opt.total_steps) {
            const int action = agent.act(*obs, false, act_rng);
            StepOutcome out = env.step(action);
            auto next = std::make_shared<const Observation>(std::move(out.next));
            buffer.push({obs, action, static_cast<float>(out.reward), next, out.done});
            obs = next;
            done = out.done;
            ++ep_steps;
            ++summary.steps;
            if (summary.steps % cfg.train_freq == 0) {
                const auto diag = agent.train_step(buffer, sample_rng);
                if (diag.performed) {
                    summary.last = diag;
                    summary.updates += cfg.gradient_steps;
                }
            }
            if (opt.checkpoint_every > 0 && summary.steps % opt.checkpoint_every == 0) checkpoint();
        }
        if (done) finish_episode(ep_steps, started);
    }
    checkpoint();
    return summary;
}

}  // namespace flab::rl
