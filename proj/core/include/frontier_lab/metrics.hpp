#pragma once

#include <cstdint>

#include "frontier_lab/gridmap.hpp"

namespace flab {

struct IoUConfig {
    double occ_threshold = 0.5;  // mean >= threshold counts as predicted occupied
    int kernel = 5;              // odd square structuring element side
};

struct IoUReport {
    double iou = 0.0;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    BinaryGrid masked_prediction;     // P_m
    BinaryGrid corrected_prediction;  // P_c
};

/// Binary dilation with a kernel x kernel square (kernel must be odd and >= 1).
BinaryGrid dilate(const BinaryGrid& grid, int kernel);

/// Filled building region: everything not reachable from the border through
/// non-Occupied cells (4-connectivity).
BinaryGrid footprint(const OccupancyGrid& truth);

/// Prediction where the observed map is Unknown, observed Occupied elsewhere.
BinaryGrid masked_prediction(const ProbabilityGrid& mean_map, const OccupancyGrid& observed, double occ_threshold);

/// Dilated IoU of occupied cells:
///   TP = |dilate(P_m) & G|, FP = |P_m & P_c & !dilate(G)|, FN = |!dilate(P_m) & G|,
///   IoU = TP / (TP + FP + FN), or 1 when that denominator is zero.
IoUReport dilated_iou(const ProbabilityGrid& mean_map, const OccupancyGrid& observed, const OccupancyGrid& truth,
                      const IoUConfig& cfg = {});

/// Caches the truth-derived rasters (G, dilated G, footprint) for repeated
/// evaluation within one episode.
class IoUEvaluator {
public:
    IoUEvaluator(const OccupancyGrid& truth, IoUConfig cfg = {});
    double iou(const ProbabilityGrid& mean_map, const OccupancyGrid& observed) const;
    IoUReport report(const ProbabilityGrid& mean_map, const OccupancyGrid& observed) const;

private:
    IoUConfig cfg_;
    BinaryGrid truth_occupied_;
    BinaryGrid truth_dilated_;
    BinaryGrid footprint_;
};

constexpr double kIouClip = 0.4;

/// Sparse training reward: max(0, iou - 0.4) * 1000 + b_r at the terminal step, 0 otherwise.
double training_reward(double iou, int budget_remaining, bool terminal);

/// Study reward: iou * 1000 + b_r.
double study_reward(double iou, int budget_remaining);

}  // namespace flab
