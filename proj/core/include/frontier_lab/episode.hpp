#pragma once

#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "frontier_lab/config.hpp"
#include "frontier_lab/metrics.hpp"
#include "frontier_lab/nav.hpp"
#include "frontier_lab/planners.hpp"

namespace flab {

enum class Termination { None, IouTarget, Budget, NoAction, Stalled };
std::string to_string(Termination t);

/// One planner decision and what executing it did.
struct StepRecord {
    int index = 0;
    Pose pose;  // before the decision
    std::string decision;
    int slot = -1;
    int direction = -1;
    Pose goal;
    double utility = 0.0;
    double prediction = 0.0;
    double path_m = 0.0;
    int valid_slots = 0;
    int timesteps = 0;
    bool collision = false;
    std::size_t new_cells = 0;
    double iou = 0.0;  // after the decision
    int b_r = 0;
};

struct EpisodeResult {
    std::string map_id;
    std::string planner;
    Pose start;
    int budget = 0;
    int steps_used = 0;
    int b_r = 0;
    double final_iou = 0.0;
    double training_reward = 0.0;
    double study_reward = 0.0;
    double distance_m = 0.0;
    Termination termination = Termination::None;
    std::vector<StepRecord> steps;
    std::vector<Pose> trajectory;
};

void to_json(nlohmann::json& j, const StepRecord& r);
void to_json(nlohmann::json& j, const EpisodeResult& r);
void from_json(const nlohmann::json& j, StepRecord& r);
void from_json(const nlohmann::json& j, EpisodeResult& r);

std::shared_ptr<const OccupancyGrid> load_truth(const MapSource& source);

/// Free cells at least margin_m from any non-Free cell (Euclidean), falling back
/// to all Free cells when none qualify. Drawn without replacement while possible.
std::vector<Pose> sample_start_poses(const OccupancyGrid& truth, int count, std::uint64_t seed, double margin_m = 1.0);

/// FNV-1a over the (x, y) sequence.
std::uint64_t starts_hash(const std::vector<Pose>& starts);

/// Squared Euclidean distance in cells from every cell to the nearest non-Free
/// cell; +inf when the grid is entirely Free.
std::vector<double> squared_distance_to_non_free(const OccupancyGrid& grid);

/// The exploration cycle as a steppable object: sense, predict, check IoU, build
/// the frontier view, take a decision, move while sensing and checking IoU each
/// timestep, repeat.
class Episode {
public:
    Episode(const EpisodeConfig& cfg, std::shared_ptr<const OccupancyGrid> truth, Pose start,
            bool frontier_actions = true, std::string planner_name = "");

    bool terminal() const { return termination_ != Termination::None; }
    Termination termination() const { return termination_; }
    const EpisodeState& state() const { return state_; }
    const PredictionBundle& bundle() const { return bundle_; }
    const PlanningView& view() const { return view_; }
    double iou() const { return iou_; }
    const EpisodeConfig& config() const { return cfg_; }
    const std::vector<StepRecord>& steps() const { return steps_; }
    PlanningContext context() const;

    /// Executes a decision. `on_timestep` runs after each timestep's IoU check.
    /// Throws ContractViolation on a terminal episode or an invalid slot.
    const StepRecord& apply(const PlannerDecision& decision, const TimestepHook& on_timestep = {});

    EpisodeResult result() const;

private:
    void refresh();
    void settle_after_motion();

    EpisodeConfig cfg_;
    ScoringConfig scoring_;
    bool frontier_actions_;
    std::string planner_name_;
    EpisodeState state_;
    Pose start_;
    PredictorEnsemble ensemble_;
    IoUEvaluator evaluator_;
    PredictionBundle bundle_;
    PlanningView view_;
    double iou_ = 0.0;
    Termination termination_ = Termination::None;
    std::vector<Pose> excluded_;
    int zero_progress_ = 0;
    std::vector<StepRecord> steps_;
};

/// Planner from cfg.planner; "human" returns a HumanRelayPlanner.
std::unique_ptr<Planner> make_planner(const EpisodeConfig& cfg);

/// Drives `planner` until the episode is terminal.
EpisodeResult run_episode(Episode& episode, Planner& planner);

/// Loads the map, picks the start (explicit or seeded), builds the planner and runs.
EpisodeResult run_episode(const EpisodeConfig& cfg, const std::function<void(const Episode&)>& on_finished = {});

}  // namespace flab
