#include "frontier_lab/config.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>

namespace flab {

std::string MapSource::id() const {
    if (!file.empty()) return std::filesystem::path(file).stem().string();
    return "gen-" + std::to_string(seed) + "-" + std::to_string(width) + "x" + std::to_string(height) + "-r" +
           std::to_string(rooms);
}

ScoringConfig EpisodeConfig::scoring() const {
    ScoringConfig s;
    s.sensor = sensor;
    s.tau = tau;
    s.window = window;
    s.slot_count = slot_count;
    s.min_frontier_size = min_frontier_size;
    s.dedup_dist_m = dedup_dist_m;
    s.dedup_score = dedup_score;
    s.budget_total = budget;
    s.step_cells = step_cells;
    return s;
}

void EpisodeConfig::validate() const {
    if (budget < 0) throw ConfigError("budget must be non-negative");
    if (step_cells < 1) throw ConfigError("step_cells must be at least 1");
    if (slot_count < 1) throw ConfigError("slot_count must be at least 1");
    if (min_frontier_size < 1) throw ConfigError("min_frontier_size must be at least 1");
    if (window < 2) throw ConfigError("window must be at least 2 cells");
    if (!(iou_target > 0.0 && iou_target <= 1.0)) throw ConfigError("iou_target must lie in (0,1]");
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0,1)");
    if (predictors.empty()) throw ConfigError("at least one predictor is required");
    if (max_zero_progress < 1) throw ConfigError("max_zero_progress must be at least 1");
    sensor.validate();
    preprocess.validate();
    encoder.stage_sides();
}

void to_json(nlohmann::json& j, const MapSource& m) {
    if (!m.file.empty()) {
        j = {{"file", m.file}};
    } else {
        j = {{"seed", m.seed}, {"width", m.width}, {"height", m.height}, {"rooms", m.rooms}};
    }
}

void from_json(const nlohmann::json& j, MapSource& m) {
    if (j.is_string()) {
        m.file = j.get<std::string>();
        return;
    }
    m.file = j.value("file", m.file);
    m.seed = j.value("seed", m.seed);
    m.width = j.value("width", m.width);
    m.height = j.value("height", m.height);
    m.rooms = j.value("rooms", m.rooms);
}

nlohmann::json predictor_to_json(const PredictorKind& k) {
    return std::visit(
        [](const auto& p) -> nlohmann::json {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, NullPredictor>) {
                return {{"kind", "null"}};
            } else if constexpr (std::is_same_v<P, OracleLeakPredictor>) {
                return {{"kind", "oracle_leak"},
                        {"blur_radius", p.blur_radius},
                        {"noise_seed", p.noise_seed},
                        {"noise_amplitude", p.noise_amplitude}};
            } else if constexpr (std::is_same_v<P, MorphologicalPredictor>) {
                return {{"kind", "morphological"}, {"radius", p.radius}};
            } else {
                return {{"kind", "external"}, {"endpoint", p.endpoint}, {"timeout_ms", p.timeout_ms}};
            }
        },
        k);
}

PredictorKind predictor_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "null") return NullPredictor{};
    if (kind == "oracle_leak") {
        OracleLeakPredictor p;
        p.blur_radius = j.value("blur_radius", p.blur_radius);
        p.noise_seed = j.value("noise_seed", p.noise_seed);
        p.noise_amplitude = j.value("noise_amplitude", p.noise_amplitude);
        return p;
    }
    if (kind == "morphological") return MorphologicalPredictor{j.value("radius", 5)};
    if (kind == "external") return ExternalPredictor{j.at("endpoint").get<std::string>(), j.value("timeout_ms", 30000)};
    throw ConfigError("unknown predictor kind '" + kind + "'");
}

void to_json(nlohmann::json& j, const EpisodeConfig& c) {
    nlohmann::json preds = nlohmann::json::array();
    for (const auto& p : c.predictors) preds.push_back(predictor_to_json(p));
    j = {{"map", c.map},
         {"start", c.start ? nlohmann::json::array({c.start->x, c.start->y}) : nlohmann::json(nullptr)},
         {"start_margin_m", c.start_margin_m},
         {"budget", c.budget},
         {"step_cells", c.step_cells},
         {"sensor", {{"beam_count", c.sensor.beam_count}, {"range_m", c.sensor.range_m}}},
         {"slot_count", c.slot_count},
         {"min_frontier_size", c.min_frontier_size},
         {"dedup_dist_m", c.dedup_dist_m},
         {"dedup_score", c.dedup_score},
         {"tau", c.tau},
         {"window", c.window},
         {"planner", c.planner},
         {"mapex_lambda", c.mapex.lambda},
         {"checkpoint", c.checkpoint},
         {"preprocess", c.preprocess},
         {"encoder", c.encoder},
         {"hidden", c.hidden},
         {"primitive_reward", {{"new_cell", c.primitive_reward.new_cell}, {"collision", c.primitive_reward.collision}}},
         {"predictors", preds},
         {"iou_target", c.iou_target},
         {"iou", {{"occ_threshold", c.iou.occ_threshold}, {"kernel", c.iou.kernel}}},
         {"seed", c.seed},
         {"max_zero_progress", c.max_zero_progress},
         {"replan_every_step", c.replan_every_step}};
}

void from_json(const nlohmann::json& j, EpisodeConfig& c) {
    try {
        if (j.contains("map")) c.map = j.at("map").get<MapSource>();
        if (j.contains("start")) {
            const auto& s = j.at("start");
            if (s.is_null()) {
                c.start.reset();
            } else {
                c.start = Pose{s.at(0).get<int>(), s.at(1).get<int>()};
            }
        }
        c.start_margin_m = j.value("start_margin_m", c.start_margin_m);
        c.budget = j.value("budget", c.budget);
        c.step_cells = j.value("step_cells", c.step_cells);
        if (j.contains("sensor")) {
            c.sensor.beam_count = j.at("sensor").value("beam_count", c.sensor.beam_count);
            c.sensor.range_m = j.at("sensor").value("range_m", c.sensor.range_m);
        }
        c.slot_count = j.value("slot_count", c.slot_count);
        c.min_frontier_size = j.value("min_frontier_size", c.min_frontier_size);
        c.dedup_dist_m = j.value("dedup_dist_m", c.dedup_dist_m);
        c.dedup_score = j.value("dedup_score", c.dedup_score);
        c.tau = j.value("tau", c.tau);
        c.window = j.value("window", c.window);
        c.planner = j.value("planner", c.planner);
        c.mapex.lambda = j.value("mapex_lambda", c.mapex.lambda);
        c.checkpoint = j.value("checkpoint", c.checkpoint);
        if (j.contains("preprocess")) c.preprocess = j.at("preprocess").get<rl::PreprocessSpec>();
        if (j.contains("encoder")) c.encoder = j.at("encoder").get<rl::EncoderSpec>();
        c.hidden = j.value("hidden", c.hidden);
        if (j.contains("primitive_reward")) {
            c.primitive_reward.new_cell = j.at("primitive_reward").value("new_cell", c.primitive_reward.new_cell);
            c.primitive_reward.collision = j.at("primitive_reward").value("collision", c.primitive_reward.collision);
        }
        if (j.contains("predictors")) {
            c.predictors.clear();
            for (const auto& p : j.at("predictors")) c.predictors.push_back(predictor_from_json(p));
        }
        c.iou_target = j.value("iou_target", c.iou_target);
        if (j.contains("iou")) {
            c.iou.occ_threshold = j.at("iou").value("occ_threshold", c.iou.occ_threshold);
            c.iou.kernel = j.at("iou").value("kernel", c.iou.kernel);
        }
        c.seed = j.value("seed", c.seed);
        c.max_zero_progress = j.value("max_zero_progress", c.max_zero_progress);
        c.replan_every_step = j.value("replan_every_step", c.replan_every_step);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad episode config: ") + e.what());
    }
    c.validate();
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed) {
    if (explicit_seed) return *explicit_seed;
    if (const char* env = std::getenv("FRONTIER_LAB_SEED"); env != nullptr && *env != '\0') {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError(std::string("FRONTIER_LAB_SEED is not an integer: ") + env);
        }
    }
    return 0;
}

std::filesystem::path runs_root() {
    if (const char* env = std::getenv("FRONTIER_LAB_RUNS_DIR"); env != nullptr && *env != '\0') return env;
    return "runs";
}

std::filesystem::path make_run_dir(const std::filesystem::path& root) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
    std::filesystem::create_directories(root);
    for (int k = 0;; ++k) {
        auto dir = root / (k == 0 ? std::string(stamp) : std::string(stamp) + "-" + std::to_string(k));
        if (std::filesystem::create_directory(dir)) return dir;
    }
}

}  // namespace flab
