#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "frontier_lab/gridmap.hpp"

namespace flab {

struct SensorConfig {
    int beam_count = 2500;
    double range_m = 20.0;

    double range_cells(double resolution) const { return range_m / resolution; }
    void validate() const;
};

using VisibilityMask = BinaryGrid;

/// Cell sequence of every beam relative to the origin cell, traversed by an
/// integer DDA from the origin cell center. Each ray starts with (0,0) and ends
/// at the last cell entered within range.
class RayTable {
public:
    struct Offset {
        std::int16_t dx;
        std::int16_t dy;
    };

    RayTable(int beam_count, double range_cells);

    int beam_count() const { return static_cast<int>(starts_.size()) - 1; }
    std::span<const Offset> ray(int beam) const {
        return {offsets_.data() + starts_[beam], offsets_.data() + starts_[beam + 1]};
    }

private:
    std::vector<Offset> offsets_;
    std::vector<std::size_t> starts_;
};

/// Process-wide cache keyed by (beam_count, range in cells); thread-safe.
const RayTable& shared_ray_table(const SensorConfig& cfg, double resolution);

/// Marks truth-Free cells Free and the first truth-Occupied cell per beam Occupied.
/// Beams stop at Occupied or truth-Unknown cells, the range limit, or the grid edge.
/// Returns how many cells changed from Unknown. Throws ContractViolation unless the
/// pose is a Free cell of `truth`.
std::size_t sense_into(const OccupancyGrid& truth, Pose pose, const SensorConfig& cfg, OccupancyGrid& observed);

OccupancyGrid sense(const OccupancyGrid& truth, Pose pose, const SensorConfig& cfg, OccupancyGrid observed);

/// Occupied cells block (and are themselves visible); Free and Unknown are transparent.
VisibilityMask visibility_mask(const OccupancyGrid& grid, Pose pose, const SensorConfig& cfg);

/// Transmittance raycast: T starts at 1 and is multiplied by (1 - p) per cell; a cell
/// is visible iff T >= tau when the beam enters it.
VisibilityMask probabilistic_visibility(const ProbabilityGrid& mean_map, Pose pose, const SensorConfig& cfg,
                                        double tau = 0.5);

/// Reusable scratch for visiting each visible cell once without allocating a mask.
class VisibilityScratch {
public:
    /// Calls fn(index) once per visible cell of visibility_mask(grid, pose, cfg).
    template <typename Fn>
    void for_each_visible(const OccupancyGrid& grid, Pose pose, const SensorConfig& cfg, Fn&& fn);

    /// Calls fn(index) once per visible cell of probabilistic_visibility(...).
    template <typename Fn>
    void for_each_visible(const ProbabilityGrid& mean_map, Pose pose, const SensorConfig& cfg, double tau, Fn&& fn);

private:
    bool begin(std::size_t cells) {
        if (stamps_.size() != cells) {
            stamps_.assign(cells, 0);
            generation_ = 0;
        }
        if (++generation_ == 0) {
            std::fill(stamps_.begin(), stamps_.end(), 0u);
            generation_ = 1;
        }
        return true;
    }
    bool mark(std::size_t i) {
        if (stamps_[i] == generation_) return false;
        stamps_[i] = generation_;
        return true;
    }

    std::vector<std::uint32_t> stamps_;
    std::uint32_t generation_ = 0;
};

template <typename Fn>
void VisibilityScratch::for_each_visible(const OccupancyGrid& grid, Pose pose, const SensorConfig& cfg, Fn&& fn) {
    const RayTable& table = shared_ray_table(cfg, grid.resolution());
    begin(grid.size());
    const auto cells = grid.cells();
    for (int b = 0; b < table.beam_count(); ++b) {
        for (const auto off : table.ray(b)) {
            const int x = pose.x + off.dx, y = pose.y + off.dy;
            if (!grid.in_bounds(x, y)) break;
            const std::size_t i = grid.index(x, y);
            if (mark(i)) fn(i);
            if (cells[i] == CellState::Occupied) break;
        }
    }
}

template <typename Fn>
void VisibilityScratch::for_each_visible(const ProbabilityGrid& mean_map, Pose pose, const SensorConfig& cfg,
                                         double tau, Fn&& fn) {
    const RayTable& table = shared_ray_table(cfg, mean_map.resolution());
    begin(mean_map.size());
    const auto cells = mean_map.cells();
    for (int b = 0; b < table.beam_count(); ++b) {
        double transmittance = 1.0;
        for (const auto off : table.ray(b)) {
            const int x = pose.x + off.dx, y = pose.y + off.dy;
            if (!mean_map.in_bounds(x, y) || transmittance < tau) break;
            const std::size_t i = mean_map.index(x, y);
            if (mark(i)) fn(i);
            transmittance *= 1.0 - cells[i];
        }
    }
}

}  // namespace flab
