#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "frontier_lab/metrics.hpp"
#include "frontier_lab/planners.hpp"
#include "frontier_lab/predictor.hpp"
#include "frontier_lab/rl/networks.hpp"
#include "frontier_lab/rl/observation.hpp"
#include "frontier_lab/scoring.hpp"

namespace flab {

/// A map file, or a procedural floorplan when `file` is empty.
struct MapSource {
    std::string file;
    std::uint64_t seed = 1;
    int width = 150;
    int height = 150;
    int rooms = 6;

    std::string id() const;
    bool operator==(const MapSource&) const = default;
};

struct PrimitiveRewardConfig {
    double new_cell = 0.01;
    double collision = -1.0;
};

struct EpisodeConfig {
    MapSource map;
    std::optional<Pose> start;
    double start_margin_m = 1.0;
    int budget = 500;
    int step_cells = 6;
    SensorConfig sensor;
    int slot_count = 10;
    int min_frontier_size = 5;
    double dedup_dist_m = 5.0;
    double dedup_score = 0.01;
    double tau = 0.5;
    int window = 1600;

    std::string planner = "nearest";
    MapexParams mapex;
    std::string checkpoint;  // rl, and optionally primitive
    rl::PreprocessSpec preprocess;
    rl::EncoderSpec encoder;  // untrained primitive policy
    int hidden = 256;
    PrimitiveRewardConfig primitive_reward;

    std::vector<PredictorKind> predictors = default_ensemble();
    double iou_target = 0.95;
    IoUConfig iou;
    std::uint64_t seed = 0;
    /// Consecutive decisions that fail to move the robot before the episode is
    /// declared stalled.
    int max_zero_progress = 10;
    /// Re-run A* after every timestep instead of only when the path is blocked.
    bool replan_every_step = false;

    ScoringConfig scoring() const;
    void validate() const;
};

void to_json(nlohmann::json& j, const MapSource& m);
void from_json(const nlohmann::json& j, MapSource& m);
void to_json(nlohmann::json& j, const EpisodeConfig& c);
/// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, EpisodeConfig& c);

nlohmann::json predictor_to_json(const PredictorKind& k);
PredictorKind predictor_from_json(const nlohmann::json& j);

/// Reads a JSON document; ConfigError with the path on failure.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Explicit seed, else FRONTIER_LAB_SEED, else 0.
std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed);

/// FRONTIER_LAB_RUNS_DIR or ./runs.
std::filesystem::path runs_root();

/// Creates <root>/<UTC timestamp>[-k] and returns it.
std::filesystem::path make_run_dir(const std::filesystem::path& root);

}  // namespace flab
