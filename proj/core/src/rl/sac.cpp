#include "frontier_lab/rl/sac.hpp"

namespace flab::rl {

void SacConfig::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0,1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0,1]");
    if (batch < 1 || buffer_capacity < 1 || learning_starts < 0 || gradient_steps < 1 || train_freq < 1 || hidden < 1) {
        throw ConfigError("SAC sizes must be positive");
    }
    if (!(learning_rate > 0.0) || !(initial_alpha > 0.0) || target_entropy_scale < 0.0) {
        throw ConfigError("SAC rates must be positive");
    }
}

void to_json(nlohmann::json& j, const SacConfig& c) {
    j = {{"gamma", c.gamma},
         {"batch", c.batch},
         {"buffer_capacity", c.buffer_capacity},
         {"learning_starts", c.learning_starts},
         {"gradient_steps", c.gradient_steps},
         {"tau", c.tau},
         {"train_freq", c.train_freq},
         {"learning_rate", c.learning_rate},
         {"hidden", c.hidden},
         {"auto_alpha", c.auto_alpha},
         {"initial_alpha", c.initial_alpha},
         {"target_entropy_scale", c.target_entropy_scale}};
}

void from_json(const nlohmann::json& j, SacConfig& c) {
    c.gamma = j.value("gamma", c.gamma);
    c.batch = j.value("batch", c.batch);
    c.buffer_capacity = j.value("buffer_capacity", c.buffer_capacity);
    c.learning_starts = j.value("learning_starts", c.learning_starts);
    c.gradient_steps = j.value("gradient_steps", c.gradient_steps);
    c.tau = j.value("tau", c.tau);
    c.train_freq = j.value("train_freq", c.train_freq);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.hidden = j.value("hidden", c.hidden);
    c.auto_alpha = j.value("auto_alpha", c.auto_alpha);
    c.initial_alpha = j.value("initial_alpha", c.initial_alpha);
    c.target_entropy_scale = j.value("target_entropy_scale", c.target_entropy_scale);
    c.validate();
}

}  // namespace flab::rl
