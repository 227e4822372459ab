#include "frontier_lab/nav.hpp"

#include <numbers>
#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

namespace flab {

std::optional<Pose> snap_goal(const OccupancyGrid& observed, Pose goal) {
    if (observed.in_bounds(goal) && observed[goal] == CellState::Free) return goal;
    std::optional<Pose> best;
    int best_d2 = 0;
    for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
            const Pose p{goal.x + dx, goal.y + dy};
            if (!observed.in_bounds(p) || observed[p] != CellState::Free) continue;
            const int d2 = dx * dx + dy * dy;
            // raster scan order already yields lowest (y, x) among equal distances
            if (!best || d2 < best_d2) {
                best = p;
                best_d2 = d2;
            }
        }
    }
    return best;
}

namespace {

struct OpenEntry {
    double f;
    double h;
    int y;
    int x;
    int a;  // axial steps in g
    int d;  // diagonal steps in g
    bool operator>(const OpenEntry& o) const { return std::tie(f, h, y, x) > std::tie(o.f, o.h, o.y, o.x); }
};

double octile(int dx, int dy) {
    dx = std::abs(dx);
    dy = std::abs(dy);
    return std::abs(dx - dy) + std::numbers::sqrt2 * std::min(dx, dy);
}

}  // namespace

std::optional<Path> astar(const OccupancyGrid& observed, Pose start, Pose goal_in) {
    if (!observed.in_bounds(start) || observed[start] != CellState::Free) {
        throw ContractViolation("A* start must be a Free cell");
    }
    const auto goal_opt = snap_goal(observed, goal_in);
    if (!goal_opt) return std::nullopt;
    const Pose goal = *goal_opt;

    const std::size_t n = observed.size();
    constexpr int kUnset = -1;
    std::vector<int> best_a(n, kUnset), best_d(n, 0);
    std::vector<int> parent(n, -1);
    std::vector<std::uint8_t> closed(n, 0);
    std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;

    auto cost = [](int a, int d) { return a + d * std::numbers::sqrt2; };
    const auto start_i = observed.index(start.x, start.y);
    best_a[start_i] = 0;
    const double h0 = octile(goal.x - start.x, goal.y - start.y);
    open.push({h0, h0, start.y, start.x, 0, 0});

    const auto cells = observed.cells();
    auto free_at = [&](int x, int y) { return observed.in_bounds(x, y) && cells[observed.index(x, y)] == CellState::Free; };
    auto occupied_at = [&](int x, int y) {
        return observed.in_bounds(x, y) && cells[observed.index(x, y)] == CellState::Occupied;
    };

    bool found = false;
    while (!open.empty()) {
        const OpenEntry e = open.top();
        open.pop();
        const auto i = observed.index(e.x, e.y);
        if (closed[i] || e.a != best_a[i] || e.d != best_d[i]) continue;
        closed[i] = 1;
        if (e.x == goal.x && e.y == goal.y) {
            found = true;
            break;
        }
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = e.x + dx, ny = e.y + dy;
                if (!free_at(nx, ny)) continue;
                const bool diagonal = dx != 0 && dy != 0;
                if (diagonal && (occupied_at(e.x + dx, e.y) || occupied_at(e.x, e.y + dy))) continue;
                const auto j = observed.index(nx, ny);
                if (closed[j]) continue;
                const int na = e.a + (diagonal ? 0 : 1), nd = e.d + (diagonal ? 1 : 0);
                const double g = cost(na, nd);
                if (best_a[j] != kUnset && cost(best_a[j], best_d[j]) <= g) continue;
                best_a[j] = na;
                best_d[j] = nd;
                parent[j] = static_cast<int>(i);
                const double h = octile(goal.x - nx, goal.y - ny);
                open.push({g + h, h, ny, nx, na, nd});
            }
        }
    }
    if (!found) return std::nullopt;

    Path path;
    path.resolution = observed.resolution();
    const auto goal_i = observed.index(goal.x, goal.y);
    path.axial_steps = best_a[goal_i];
    path.diagonal_steps = best_d[goal_i];
    for (int i = static_cast<int>(goal_i); i >= 0; i = parent[i]) {
        path.waypoints.push_back({i % observed.width(), i / observed.width()});
        if (static_cast<std::size_t>(i) == start_i) break;
    }
    std::reverse(path.waypoints.begin(), path.waypoints.end());
    return path;
}

DistanceField::DistanceField(const OccupancyGrid& observed, Pose source) : width_(observed.width()) {
    if (!observed.in_bounds(source) || observed[source] != CellState::Free) {
        throw ContractViolation("distance field source must be a Free cell");
    }
    const std::size_t n = observed.size();
    axial_.assign(n, -1);
    diagonal_.assign(n, 0);
    std::vector<std::uint8_t> closed(n, 0);
    using Entry = std::tuple<double, int, int, int>;  // cost, index, a, d
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    const auto cells = observed.cells();
    auto free_at = [&](int x, int y) { return observed.in_bounds(x, y) && cells[observed.index(x, y)] == CellState::Free; };
    auto occupied_at = [&](int x, int y) {
        return observed.in_bounds(x, y) && cells[observed.index(x, y)] == CellState::Occupied;
    };
    const int s = static_cast<int>(observed.index(source.x, source.y));
    axial_[s] = 0;
    open.emplace(0.0, s, 0, 0);
    while (!open.empty()) {
        const auto [c, i, a, d] = open.top();
        open.pop();
        if (closed[i] || a != axial_[i] || d != diagonal_[i]) continue;
        closed[i] = 1;
        const int x = i % width_, y = i / width_;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = x + dx, ny = y + dy;
                if (!free_at(nx, ny)) continue;
                const bool diag = dx != 0 && dy != 0;
                if (diag && (occupied_at(x + dx, y) || occupied_at(x, y + dy))) continue;
                const int j = static_cast<int>(observed.index(nx, ny));
                if (closed[j]) continue;
                const int na = a + (diag ? 0 : 1), nd = d + (diag ? 1 : 0);
                const double g = na + nd * std::numbers::sqrt2;
                if (axial_[j] >= 0 && axial_[j] + diagonal_[j] * std::numbers::sqrt2 <= g) continue;
                axial_[j] = na;
                diagonal_[j] = nd;
                open.emplace(g, j, na, nd);
            }
        }
    }
}

bool DistanceField::reachable(Pose p) const {
    const auto i = static_cast<std::size_t>(p.y) * width_ + p.x;
    return p.x >= 0 && p.y >= 0 && p.x < width_ && i < axial_.size() && axial_[i] >= 0;
}

double DistanceField::cost_cells(Pose p) const {
    if (!reachable(p)) return INFINITY;
    const auto i = static_cast<std::size_t>(p.y) * width_ + p.x;
    return axial_[i] + diagonal_[i] * std::numbers::sqrt2;
}

EpisodeState EpisodeState::start(std::shared_ptr<const OccupancyGrid> truth, Pose start_pose, int budget,
                                 const SensorConfig& sensor) {
    if (!truth) throw ContractViolation("episode needs a truth map");
    if (budget < 0) throw ContractViolation("budget must be non-negative");
    EpisodeState s;
    s.observed = OccupancyGrid(truth->width(), truth->height(), CellState::Unknown, truth->resolution());
    s.truth = std::move(truth);
    s.sensor = sensor;
    s.pose = start_pose;
    s.budget_total = budget;
    s.budget_remaining = budget;
    s.trajectory.push_back(start_pose);
    sense_into(*s.truth, start_pose, sensor, s.observed);
    return s;
}

AdvanceResult advance(EpisodeState& state, const Path& path, int step_cells, const TimestepHook& hook) {
    if (step_cells < 1) throw ContractViolation("step_cells must be at least 1");
    AdvanceResult result;
    if (path.waypoints.empty()) return result;
    if (!(path.waypoints.front() == state.pose)) throw ContractViolation("path must start at the robot pose");
    std::size_t at = 0;
    const std::size_t last = path.waypoints.size() - 1;
    while (at < last) {
        if (state.budget_remaining <= 0) {
            result.reason = AdvanceStop::BudgetExhausted;
            return result;
        }
        int moved = 0;
        bool blocked = false;
        while (moved < step_cells && at < last) {
            const Pose next = path.waypoints[at + 1];
            if (state.observed[next] == CellState::Occupied) {
                blocked = true;
                break;
            }
            const Pose prev = state.pose;
            state.pose = next;
            state.distance_m += (prev.x != next.x && prev.y != next.y ? std::numbers::sqrt2 : 1.0) * state.observed.resolution();
            state.trajectory.push_back(next);
            ++at;
            ++moved;
        }
        if (moved > 0) {
            --state.budget_remaining;
            ++result.timesteps;
            result.newly_observed += sense_into(*state.truth, state.pose, state.sensor, state.observed);
            if (hook && hook(state)) {
                result.reason = at < last ? AdvanceStop::Interrupted : AdvanceStop::PathEnd;
                return result;
            }
        }
        if (blocked) {
            result.reason = AdvanceStop::Blocked;
            return result;
        }
    }
    result.reason = AdvanceStop::PathEnd;
    return result;
}

}  // namespace flab
