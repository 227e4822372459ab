#include "frontier_lab/sensor.hpp"

#include <numbers>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

namespace flab {

void SensorConfig::validate() const {
    if (beam_count < 4) throw ContractViolation("beam_count must be at least 4");
    if (!(range_m > 0.0)) throw ContractViolation("sensor range must be positive");
}

RayTable::RayTable(int beam_count, double range_cells) {
    if (beam_count < 4) throw ContractViolation("beam_count must be at least 4");
    if (!(range_cells > 0.0)) throw ContractViolation("sensor range must be positive");
    constexpr double inf = std::numeric_limits<double>::infinity();
    starts_.reserve(beam_count + 1);
    for (int k = 0; k < beam_count; ++k) {
        starts_.push_back(offsets_.size());
        const double angle = 2.0 * std::numbers::pi * k / beam_count;
        const double dx = std::cos(angle), dy = std::sin(angle);
        const int step_x = dx > 0 ? 1 : -1, step_y = dy > 0 ? 1 : -1;
        // Cells are unit squares; the beam starts at the origin cell center, so
        // the first boundary on each axis is half a cell away.
        const double delta_x = std::abs(dx) < 1e-12 ? inf : 1.0 / std::abs(dx);
        const double delta_y = std::abs(dy) < 1e-12 ? inf : 1.0 / std::abs(dy);
        double t_max_x = 0.5 * delta_x, t_max_y = 0.5 * delta_y;
        int cx = 0, cy = 0;
        offsets_.push_back({0, 0});
        while (true) {
            double t;
            if (t_max_x <= t_max_y) {
                t = t_max_x;
                cx += step_x;
                t_max_x += delta_x;
            } else {
                t = t_max_y;
                cy += step_y;
                t_max_y += delta_y;
            }
            if (t > range_cells) break;
            offsets_.push_back({static_cast<std::int16_t>(cx), static_cast<std::int16_t>(cy)});
        }
    }
    starts_.push_back(offsets_.size());
}

const RayTable& shared_ray_table(const SensorConfig& cfg, double resolution) {
    static std::mutex mutex;
    static std::map<std::pair<int, double>, std::unique_ptr<RayTable>> cache;
    const double range = cfg.range_cells(resolution);
    std::lock_guard lock(mutex);
    auto& slot = cache[{cfg.beam_count, range}];
    if (!slot) slot = std::make_unique<RayTable>(cfg.beam_count, range);
    return *slot;
}

std::size_t sense_into(const OccupancyGrid& truth, Pose pose, const SensorConfig& cfg, OccupancyGrid& observed) {
    require_same_shape(truth, observed, "sense truth/observed");
    if (!truth.in_bounds(pose) || truth[pose] != CellState::Free) {
        throw ContractViolation("sensing pose must be a Free cell of the truth map");
    }
    const RayTable& table = shared_ray_table(cfg, truth.resolution());
    const auto t = truth.cells();
    auto o = observed.cells();
    std::size_t changed = 0;
    for (int b = 0; b < table.beam_count(); ++b) {
        for (const auto off : table.ray(b)) {
            const int x = pose.x + off.dx, y = pose.y + off.dy;
            if (!truth.in_bounds(x, y)) break;
            const std::size_t i = truth.index(x, y);
            const CellState s = t[i];
            if (s == CellState::Unknown) break;
            if (o[i] == CellState::Unknown) {
                o[i] = s;
                ++changed;
            }
            if (s == CellState::Occupied) break;
        }
    }
    return changed;
}

OccupancyGrid sense(const OccupancyGrid& truth, Pose pose, const SensorConfig& cfg, OccupancyGrid observed) {
    sense_into(truth, pose, cfg, observed);
    return observed;
}

VisibilityMask visibility_mask(const OccupancyGrid& grid, Pose pose, const SensorConfig& cfg) {
    VisibilityMask mask(grid.width(), grid.height(), 0, grid.resolution());
    if (!grid.in_bounds(pose)) throw ContractViolation("visibility pose outside grid");
    VisibilityScratch scratch;
    auto cells = mask.cells();
    scratch.for_each_visible(grid, pose, cfg, [&](std::size_t i) { cells[i] = 1; });
    return mask;
}

VisibilityMask probabilistic_visibility(const ProbabilityGrid& mean_map, Pose pose, const SensorConfig& cfg,
                                        double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw ContractViolation("tau must lie in (0,1)");
    if (!mean_map.in_bounds(pose)) throw ContractViolation("visibility pose outside grid");
    VisibilityMask mask(mean_map.width(), mean_map.height(), 0, mean_map.resolution());
    VisibilityScratch scratch;
    auto cells = mask.cells();
    scratch.for_each_visible(mean_map, pose, cfg, tau, [&](std::size_t i) { cells[i] = 1; });
    return mask;
}

}  // namespace flab
