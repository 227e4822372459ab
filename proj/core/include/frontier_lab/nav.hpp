#pragma once

#include <numbers>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "frontier_lab/gridmap.hpp"
#include "frontier_lab/sensor.hpp"

namespace flab {

/// 8-connected waypoint sequence. Cost is tracked as exact step counts so that
/// equal-cost paths compare equal regardless of summation order.
struct Path {
    std::vector<Pose> waypoints;
    int axial_steps = 0;
    int diagonal_steps = 0;
    double resolution = kDefaultResolution;

    double cost_cells() const { return axial_steps + diagonal_steps * std::numbers::sqrt2; }
    double length_m() const { return cost_cells() * resolution; }
};

/// Nearest Free cell (Euclidean, then lowest y, x) within Chebyshev radius 2, or
/// the goal itself when it is Free.
std::optional<Pose> snap_goal(const OccupancyGrid& observed, Pose goal);

/// Minimum-cost path over observed-Free cells. Axial steps cost 1, diagonal
/// sqrt(2); a diagonal step is forbidden when either adjacent axial cell is
/// Occupied. Returns nullopt when unreachable. Throws ContractViolation if start
/// is not Free.
std::optional<Path> astar(const OccupancyGrid& observed, Pose start, Pose goal);

/// Single-source shortest path costs (in cells) under the same move rules as
/// astar; unreachable cells hold +inf.
class DistanceField {
public:
    DistanceField(const OccupancyGrid& observed, Pose source);
    double cost_cells(Pose p) const;
    bool reachable(Pose p) const;

private:
    int width_ = 0;
    std::vector<int> axial_;
    std::vector<int> diagonal_;
};

struct EpisodeState {
    std::shared_ptr<const OccupancyGrid> truth;
    OccupancyGrid observed;
    SensorConfig sensor;
    Pose pose;
    int budget_total = 0;
    int budget_remaining = 0;
    double distance_m = 0.0;
    /// Every waypoint the robot has occupied, starting with the start pose.
    std::vector<Pose> trajectory;

    /// Fresh state: all Unknown, then one sense at the start pose.
    static EpisodeState start(std::shared_ptr<const OccupancyGrid> truth, Pose start_pose, int budget,
                              const SensorConfig& sensor);
};

enum class AdvanceStop { PathEnd, BudgetExhausted, Blocked, Interrupted };

struct AdvanceResult {
    int timesteps = 0;
    AdvanceStop reason = AdvanceStop::PathEnd;
    std::size_t newly_observed = 0;
};

/// Called after every timestep (move + sense); returning true stops the advance.
using TimestepHook = std::function<bool(const EpisodeState&)>;

/// Moves up to step_cells waypoints per timestep, spending one budget unit and
/// sensing once per timestep, until the path ends, the budget runs out, the next
/// waypoint is observed Occupied, or the hook asks to stop.
AdvanceResult advance(EpisodeState& state, const Path& path, int step_cells = 6, const TimestepHook& hook = {});

}  // namespace flab
