#include "frontier_lab/frontier.hpp"

#include <algorithm>
#include <cmath>

namespace flab {

BinaryGrid frontier_cells(const OccupancyGrid& observed) {
    const int w = observed.width(), h = observed.height();
    // Unknown indicator convolved with a 3x3 ring kernel (center weight 0).
    std::vector<std::uint8_t> unknown(observed.size());
    for (std::size_t i = 0; i < unknown.size(); ++i) unknown[i] = observed.cells()[i] == CellState::Unknown;
    BinaryGrid out(w, h, 0, observed.resolution());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (observed(x, y) != CellState::Free) continue;
            int response = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                const int ny = y + dy;
                if (ny < 0 || ny >= h) continue;
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx;
                    if ((dx == 0 && dy == 0) || nx < 0 || nx >= w) continue;
                    response += unknown[observed.index(nx, ny)];
                }
            }
            out(x, y) = response > 0;
        }
    }
    return out;
}

std::vector<Frontier> detect_frontiers(const OccupancyGrid& observed, int min_size) {
    if (min_size < 1) throw ContractViolation("min frontier size must be at least 1");
    const BinaryGrid edge = frontier_cells(observed);
    const int w = observed.width(), h = observed.height();
    std::vector<std::uint8_t> seen(edge.size(), 0);
    std::vector<Frontier> out;
    std::vector<Pose> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!edge(x, y) || seen[edge.index(x, y)]) continue;
            Frontier f;
            stack.assign(1, {x, y});
            seen[edge.index(x, y)] = 1;
            while (!stack.empty()) {
                const Pose p = stack.back();
                stack.pop_back();
                f.members.push_back(p);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = p.x + dx, ny = p.y + dy;
                        if (!edge.in_bounds(nx, ny)) continue;
                        const auto i = edge.index(nx, ny);
                        if (!edge.cells()[i] || seen[i]) continue;
                        seen[i] = 1;
                        stack.push_back({nx, ny});
                    }
                }
            }
            if (static_cast<int>(f.members.size()) < min_size) continue;
            std::sort(f.members.begin(), f.members.end(),
                      [](Pose a, Pose b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
            double cx = 0.0, cy = 0.0;
            for (Pose p : f.members) {
                cx += p.x;
                cy += p.y;
            }
            cx /= static_cast<double>(f.members.size());
            cy /= static_cast<double>(f.members.size());
            // members are (y, x)-sorted, so strict < keeps the lowest (y, x) on ties
            double best = INFINITY;
            for (Pose p : f.members) {
                const double d = (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
                if (d < best) {
                    best = d;
                    f.center = p;
                }
            }
            f.size = static_cast<int>(f.members.size());
            f.valid = true;
            out.push_back(std::move(f));
        }
    }
    return out;
}

bool frontier_priority_less(const Frontier& a, const Frontier& b) {
    if (a.prediction_score != b.prediction_score) return a.prediction_score > b.prediction_score;
    if (a.size != b.size) return a.size > b.size;
    if (a.center.y != b.center.y) return a.center.y < b.center.y;
    return a.center.x < b.center.x;
}

std::vector<Frontier> deduplicate(std::vector<Frontier> frontiers, double resolution, double dist_threshold_m,
                                  double score_threshold) {
    std::stable_sort(frontiers.begin(), frontiers.end(), frontier_priority_less);
    std::vector<Frontier> kept;
    kept.reserve(frontiers.size());
    for (auto& f : frontiers) {
        const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const Frontier& k) {
            const double dist_m = std::hypot(f.center.x - k.center.x, f.center.y - k.center.y) * resolution;
            return dist_m < dist_threshold_m && std::abs(f.utility_score - k.utility_score) < score_threshold &&
                   std::abs(f.prediction_score - k.prediction_score) < score_threshold;
        });
        if (!duplicate) kept.push_back(std::move(f));
    }
    return kept;
}

int ActionSet::valid_count() const {
    return static_cast<int>(std::count_if(slots.begin(), slots.end(), [](const Frontier& f) { return f.valid; }));
}

std::vector<bool> ActionSet::valid_mask() const {
    std::vector<bool> mask(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) mask[i] = slots[i].valid;
    return mask;
}

ActionSet build_action_set(std::vector<Frontier> frontiers, Pose robot, int window, int slot_count) {
    if (slot_count < 1) throw ContractViolation("action set needs at least one slot");
    const int half = window / 2;
    std::erase_if(frontiers, [&](const Frontier& f) {
        return !f.valid || std::abs(f.center.x - robot.x) > half || std::abs(f.center.y - robot.y) > half;
    });
    std::stable_sort(frontiers.begin(), frontiers.end(), [](const Frontier& a, const Frontier& b) {
        if (a.prediction_score != b.prediction_score) return a.prediction_score > b.prediction_score;
        if (a.center.y != b.center.y) return a.center.y < b.center.y;
        return a.center.x < b.center.x;
    });
    if (static_cast<int>(frontiers.size()) > slot_count) frontiers.resize(slot_count);
    ActionSet set;
    set.slots = std::move(frontiers);
    set.slots.resize(slot_count);  // default-constructed slots are invalid, all-zero padding
    return set;
}

}  // namespace flab
