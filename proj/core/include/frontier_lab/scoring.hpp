#pragma once

#include <span>
#include <vector>

#include "frontier_lab/frontier.hpp"
#include "frontier_lab/predictor.hpp"
#include "frontier_lab/sensor.hpp"

namespace flab {

struct ScoringConfig {
    SensorConfig sensor;
    double tau = 0.5;          // probabilistic raycast threshold
    int window = 1600;         // robot-centered window side, cells
    int slot_count = 10;       // N
    int min_frontier_size = 5;
    double dedup_dist_m = 5.0;
    double dedup_score = 0.01;
    int budget_total = 500;    // B, timesteps
    int step_cells = 6;        // cells per timestep

    /// B expressed in meters (B * step * resolution).
    double budget_meters(double resolution) const { return budget_total * step_cells * resolution; }
};

/// Unknown cells visible from `center`, divided by the A* distance in cells (floored at 1).
double utility_score_raw(const OccupancyGrid& observed, Pose center, const SensorConfig& sensor, double path_cells,
                         VisibilityScratch* scratch = nullptr);

/// Variance summed over the probabilistic visibility mask, divided by the A* distance in cells (floored at 1).
double prediction_score_raw(const ProbabilityGrid& mean_map, const Grid<double>& variance, Pose center,
                            const SensorConfig& sensor, double path_cells, double tau = 0.5,
                            VisibilityScratch* scratch = nullptr);

/// (x - min) / (max - min); a constant input maps to 0.5.
std::vector<double> minmax_normalize(std::span<const double> raw);

/// Fills path, raw and normalized scores for every frontier; unreachable ones are
/// marked invalid and removed.
void score_frontiers(std::vector<Frontier>& frontiers, const OccupancyGrid& observed, const PredictionBundle& bundle,
                     Pose robot, const ScoringConfig& cfg);

struct SlotFeatures {
    double dx = 0.0;  // center offset / (window / 2)
    double dy = 0.0;
    double utility = 0.0;
    double prediction = 0.0;
    double traj_norm = 0.0;  // path length / B in meters
};

struct FrontierFeatures {
    std::vector<SlotFeatures> slots;
    double budget_norm = 0.0;

    /// N*2 centers, N utility, N prediction, N trajectory, 1 budget.
    std::vector<float> flatten() const;
    static constexpr int flat_size(int slot_count) { return 5 * slot_count + 1; }
};

/// Re-normalizes the valid slots' scores across the action set and derives the
/// per-slot features. Slots lacking raw scores are scored here. Valid slots
/// that turn out unreachable are dropped and the set re-packed.
FrontierFeatures score_action_set(ActionSet& set, const OccupancyGrid& observed, const PredictionBundle& bundle,
                                  Pose robot, int budget_remaining, const ScoringConfig& cfg);

/// Whole per-step frontier pipeline: detect, score, deduplicate, window/top-N, features.
struct PlanningView {
    ActionSet actions;
    FrontierFeatures features;
    int detected = 0;
    int after_dedup = 0;
};

PlanningView compute_planning_view(const OccupancyGrid& observed, const PredictionBundle& bundle, Pose robot,
                                   int budget_remaining, const ScoringConfig& cfg,
                                   std::span<const Pose> excluded_centers = {});

}  // namespace flab
