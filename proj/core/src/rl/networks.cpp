#include "frontier_lab/rl/networks.hpp"

namespace flab::rl {

std::array<int, 3> EncoderSpec::stage_sides() const {
    if (input_side < 1 || input_channels < 1 || latent < 1) throw ConfigError("encoder dimensions must be positive");
    std::array<int, 3> sides{};
    int side = input_side;
    for (int i = 0; i < 3; ++i) {
        const auto& st = stages[i];
        if (st.out_channels < 1 || st.kernel < 1 || st.stride < 1 || side < st.kernel) {
            throw ConfigError("encoder stage " + std::to_string(i + 1) + " does not fit a " + std::to_string(side) +
                              "-pixel input");
        }
        side = (side - st.kernel) / st.stride + 1;
        sides[i] = side;
    }
    return sides;
}

void to_json(nlohmann::json& j, const EncoderSpec& spec) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& st : spec.stages) stages.push_back({{"channels", st.out_channels}, {"kernel", st.kernel}, {"stride", st.stride}});
    j = {{"input_side", spec.input_side}, {"input_channels", spec.input_channels}, {"stages", stages}, {"latent", spec.latent}};
}

void from_json(const nlohmann::json& j, EncoderSpec& spec) {
    spec.input_side = j.value("input_side", spec.input_side);
    spec.input_channels = j.value("input_channels", spec.input_channels);
    spec.latent = j.value("latent", spec.latent);
    if (j.contains("stages")) {
        const auto& st = j.at("stages");
        if (!st.is_array() || st.size() != 3) throw ConfigError("encoder needs exactly three conv stages");
        for (std::size_t i = 0; i < 3; ++i) {
            spec.stages[i] = {st[i].at("channels").get<int>(), st[i].at("kernel").get<int>(), st[i].at("stride").get<int>()};
        }
    }
    spec.stage_sides();
}

void to_json(nlohmann::json& j, const NetworkShape& s) {
    j = {{"encoder", s.encoder}, {"feature_size", s.feature_size}, {"actions", s.actions}, {"hidden", s.hidden}};
}

void from_json(const nlohmann::json& j, NetworkShape& s) {
    if (j.contains("encoder")) s.encoder = j.at("encoder").get<EncoderSpec>();
    s.feature_size = j.value("feature_size", s.feature_size);
    s.actions = j.value("actions", s.actions);
    s.hidden = j.value("hidden", s.hidden);
}

}  // namespace flab::rl
