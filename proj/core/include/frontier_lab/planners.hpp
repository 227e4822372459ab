#pragma once

#include <array>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>

#include "frontier_lab/frontier.hpp"
#include "frontier_lab/predictor.hpp"
#include "frontier_lab/random.hpp"
#include "frontier_lab/scoring.hpp"

namespace flab {

/// Compass order: NW, N, NE, W, E, SW, S, SE (image coordinates, y down).
enum class Direction : std::uint8_t { NW, N, NE, W, E, SW, S, SE };
inline constexpr int kDirectionCount = 8;

Pose direction_offset(Direction d);
std::string to_string(Direction d);

struct FrontierChoice {
    int slot = 0;
    bool operator==(const FrontierChoice&) const = default;
};
struct PrimitiveMove {
    Direction direction = Direction::N;
    bool operator==(const PrimitiveMove&) const = default;
};
struct NoAction {
    bool operator==(const NoAction&) const = default;
};

using PlannerDecision = std::variant<NoAction, FrontierChoice, PrimitiveMove>;

std::string describe(const PlannerDecision& d);

PlannerDecision nearest_frontier(const ActionSet& actions, Pose robot);

struct MapexParams {
    double lambda = 1.0;
};

/// argmax of (unknown_count + lambda * variance_sum) / max(euclid_cells, 1).
/// Falls back to nearest_frontier when every score is zero.
PlannerDecision mapex_planner(const ActionSet& actions, Pose robot, MapexParams params = {});

PlannerDecision random_planner(const ActionSet& actions, Rng& rng);

/// Accepts `choice` only if it names a valid slot; nullopt means rejected.
std::optional<PlannerDecision> human_relay(const ActionSet& actions, int choice);

/// Everything a planner may look at for one decision.
struct PlanningContext {
    const PlanningView* view = nullptr;  // null for primitive-action episodes
    const OccupancyGrid* observed = nullptr;
    const PredictionBundle* bundle = nullptr;
    Pose robot;
    int budget_remaining = 0;
    int budget_total = 0;
    int step_cells = 6;
};

class Planner {
public:
    virtual ~Planner() = default;
    virtual std::string name() const = 0;
    /// False for planners that act in the 8-direction primitive space.
    virtual bool uses_frontiers() const { return true; }
    virtual PlannerDecision decide(const PlanningContext& ctx) = 0;
};

class NearestPlanner final : public Planner {
public:
    std::string name() const override { return "nearest"; }
    PlannerDecision decide(const PlanningContext& ctx) override;
};

class MapexPlanner final : public Planner {
public:
    explicit MapexPlanner(MapexParams params = {}) : params_(params) {}
    std::string name() const override { return "mapex"; }
    PlannerDecision decide(const PlanningContext& ctx) override;

private:
    MapexParams params_;
};

class RandomPlanner final : public Planner {
public:
    explicit RandomPlanner(std::uint64_t seed) : rng_(seed) {}
    std::string name() const override { return "random"; }
    PlannerDecision decide(const PlanningContext& ctx) override;

private:
    Rng rng_;
};

/// Blocking planner fed by an operator. decide() parks until a valid choice is
/// posted, or returns NoAction once the relay is closed. Pre-queued choices make
/// the same class replay a recorded session.
class HumanRelayPlanner final : public Planner {
public:
    enum class PostResult { Accepted, Invalid, NotAwaiting, Closed };

    HumanRelayPlanner() = default;
    explicit HumanRelayPlanner(std::deque<int> scripted) : scripted_(std::move(scripted)) {}

    std::string name() const override { return "human"; }
    PlannerDecision decide(const PlanningContext& ctx) override;

    /// Offers a choice for the pending decision. Only the first valid post per
    /// decision is accepted.
    PostResult post(int slot);
    bool awaiting() const;
    /// Wakes any waiting decide() with NoAction; later decisions return NoAction too.
    void close();
    /// Scripted choices that were rejected during replay.
    int rejected_scripted() const { return rejected_scripted_; }

private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<int> scripted_;
    const ActionSet* pending_ = nullptr;
    std::optional<int> accepted_;
    bool closed_ = false;
    int rejected_scripted_ = 0;
};

}  // namespace flab
