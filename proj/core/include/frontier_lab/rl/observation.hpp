#pragma once

#include <cstdint>
#include <memory>
#include <nlohmann/json.hpp>
#include <span>
#include <vector>

#include "frontier_lab/predictor.hpp"
#include "frontier_lab/scoring.hpp"

namespace flab::rl {

/// Robot-centered crop (padding 0.5), bilinear resize, then max pool.
struct PreprocessSpec {
    int crop = 1600;
    int resize = 256;
    int pool = 2;
    /// 1: mean prediction; 2: + observed encoding; 3: + ensemble variance.
    int channels = 1;

    int output_side() const { return resize / pool; }
    int image_size() const { return channels * output_side() * output_side(); }
    void validate() const;

    static PreprocessSpec full_size() { return {}; }
    static PreprocessSpec desk() { return {320, 64, 2, 1}; }
};

void to_json(nlohmann::json& j, const PreprocessSpec& s);
void from_json(const nlohmann::json& j, PreprocessSpec& s);

/// One channel, side x side, row-major.
std::vector<float> preprocess_map(const ProbabilityGrid& grid, Pose robot, const PreprocessSpec& spec = {});

/// Same pipeline evaluated in three materialized stages; slow, kept as a cross-check.
std::vector<float> preprocess_map_reference(const ProbabilityGrid& grid, Pose robot, const PreprocessSpec& spec = {});

/// Channel stack selected by spec.channels.
std::vector<float> preprocess_bundle(const PredictionBundle& bundle, const OccupancyGrid& observed, Pose robot,
                                     const PreprocessSpec& spec);

/// What the agent stores per decision: the map image (encoded later by each
/// network's own encoder), the flat frontier features and the slot mask.
struct Observation {
    std::vector<float> image;
    std::vector<float> features;
    std::vector<std::uint8_t> valid;

    int valid_count() const;
};

using ObservationPtr = std::shared_ptr<const Observation>;

Observation make_observation(const PredictionBundle& bundle, const OccupancyGrid& observed, Pose robot,
                             const PlanningView& view, const PreprocessSpec& spec);

constexpr int observation_size(int latent, int slot_count) { return latent + FrontierFeatures::flat_size(slot_count); }

/// latent ‖ features.
std::vector<float> assemble_observation(std::span<const float> latent, std::span<const float> features);

}  // namespace flab::rl
