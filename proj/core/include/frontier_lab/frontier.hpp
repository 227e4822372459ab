#pragma once

#include <vector>

#include "frontier_lab/gridmap.hpp"

namespace flab {

/// A cluster of Free cells bordering Unknown space.
struct Frontier {
    Pose center;
    std::vector<Pose> members;
    int size = 0;
    // Normalized scores in [0,1].
    double utility_score = 0.0;
    double prediction_score = 0.0;
    /// A* distance from the robot in meters.
    double path_length = 0.0;
    bool valid = false;

    // Raw quantities behind the normalized scores, kept for re-normalization
    // over a subset and for the MapEx-style baseline.
    bool scored = false;
    double unknown_count = 0.0;   // unknown cells in the visibility mask
    double variance_sum = 0.0;    // variance over the probabilistic visibility mask
    double path_cells = 0.0;      // A* cost in cells
    double raw_utility = 0.0;     // unknown_count / max(path_cells, 1)
    double raw_prediction = 0.0;  // variance_sum / max(path_cells, 1)
};

/// Free cells with at least one Unknown 8-neighbor, computed as a 3x3 kernel
/// response over the Unknown indicator.
BinaryGrid frontier_cells(const OccupancyGrid& observed);

/// Frontier cells grouped by 8-connectivity; components below `min_size` dropped.
/// Output is ordered by the raster position of each component's first cell.
std::vector<Frontier> detect_frontiers(const OccupancyGrid& observed, int min_size = 5);

/// Orders by prediction score descending, then larger size, then lower (y, x) of the center.
bool frontier_priority_less(const Frontier& a, const Frontier& b);

/// Greedy duplicate suppression: a frontier is dropped when a higher-priority
/// survivor is closer than dist_threshold_m and both score gaps are below score_threshold.
std::vector<Frontier> deduplicate(std::vector<Frontier> frontiers, double resolution, double dist_threshold_m = 5.0,
                                  double score_threshold = 0.01);

/// Fixed-size action space: valid slots first (highest prediction score first),
/// then zero padding.
struct ActionSet {
    std::vector<Frontier> slots;

    int capacity() const { return static_cast<int>(slots.size()); }
    int valid_count() const;
    bool is_valid(int slot) const { return slot >= 0 && slot < capacity() && slots[slot].valid; }
    std::vector<bool> valid_mask() const;
};

/// Frontiers whose center falls outside the window x window box around the robot
/// are excluded; the rest are ranked and cut to `slot_count`.
ActionSet build_action_set(std::vector<Frontier> frontiers, Pose robot, int window = 1600, int slot_count = 10);

}  // namespace flab
