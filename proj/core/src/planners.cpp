#include "frontier_lab/planners.hpp"

#include <cmath>

namespace flab {

Pose direction_offset(Direction d) {
    static constexpr std::array<Pose, kDirectionCount> kOffsets{
        {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
    return kOffsets[static_cast<int>(d)];
}

std::string to_string(Direction d) {
    static constexpr std::array<const char*, kDirectionCount> kNames{"NW", "N", "NE", "W", "E", "SW", "S", "SE"};
    return kNames[static_cast<int>(d)];
}

std::string describe(const PlannerDecision& d) {
    if (const auto* f = std::get_if<FrontierChoice>(&d)) return "frontier " + std::to_string(f->slot);
    if (const auto* p = std::get_if<PrimitiveMove>(&d)) return "move " + to_string(p->direction);
    return "none";
}

namespace {

double euclid(Pose a, Pose b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

PlannerDecision nearest_frontier(const ActionSet& actions, Pose robot) {
    int best = -1;
    double best_d = 0.0;
    for (int i = 0; i < actions.capacity(); ++i) {
        if (!actions.is_valid(i)) continue;
        const double d = euclid(actions.slots[i].center, robot);
        if (best < 0 || d < best_d) {
            best = i;
            best_d = d;
        }
    }
    if (best < 0) return NoAction{};
    return FrontierChoice{best};
}

PlannerDecision mapex_planner(const ActionSet& actions, Pose robot, MapexParams params) {
    int best = -1;
    double best_score = 0.0;
    bool any_positive = false;
    for (int i = 0; i < actions.capacity(); ++i) {
        if (!actions.is_valid(i)) continue;
        const auto& f = actions.slots[i];
        const double score =
            (f.unknown_count + params.lambda * f.variance_sum) / std::max(euclid(f.center, robot), 1.0);
        any_positive = any_positive || score > 0.0;
        if (best < 0 || score > best_score) {
            best = i;
            best_score = score;
        }
    }
    if (best < 0) return NoAction{};
    if (!any_positive) return nearest_frontier(actions, robot);
    return FrontierChoice{best};
}

PlannerDecision random_planner(const ActionSet& actions, Rng& rng) {
    std::vector<int> valid;
    for (int i = 0; i < actions.capacity(); ++i)
        if (actions.is_valid(i)) valid.push_back(i);
    if (valid.empty()) return NoAction{};
    return FrontierChoice{valid[rng.uniform_int(valid.size())]};
}

std::optional<PlannerDecision> human_relay(const ActionSet& actions, int choice) {
    if (!actions.is_valid(choice)) return std::nullopt;
    return FrontierChoice{choice};
}

namespace {

const ActionSet& require_view(const PlanningContext& ctx, const std::string& who) {
    if (ctx.view == nullptr) throw ContractViolation(who + " planner needs a frontier planning view");
    return ctx.view->actions;
}

}  // namespace

PlannerDecision NearestPlanner::decide(const PlanningContext& ctx) {
    return nearest_frontier(require_view(ctx, name()), ctx.robot);
}

PlannerDecision MapexPlanner::decide(const PlanningContext& ctx) {
    return mapex_planner(require_view(ctx, name()), ctx.robot, params_);
}

PlannerDecision RandomPlanner::decide(const PlanningContext& ctx) { return random_planner(require_view(ctx, name()), rng_); }

PlannerDecision HumanRelayPlanner::decide(const PlanningContext& ctx) {
    const ActionSet& actions = require_view(ctx, name());
    if (actions.valid_count() == 0) return NoAction{};
    std::unique_lock lock(mu_);
    while (!scripted_.empty()) {
        const int slot = scripted_.front();
        scripted_.pop_front();
        if (auto d = human_relay(actions, slot)) return *d;
        ++rejected_scripted_;
    }
    if (closed_) return NoAction{};
    pending_ = &actions;
    accepted_.reset();
    cv_.wait(lock, [&] { return accepted_.has_value() || closed_; });
    pending_ = nullptr;
    if (!accepted_) return NoAction{};
    const int slot = *accepted_;
    accepted_.reset();
    return FrontierChoice{slot};
}

HumanRelayPlanner::PostResult HumanRelayPlanner::post(int slot) {
    std::lock_guard lock(mu_);
    if (closed_) return PostResult::Closed;
    if (pending_ == nullptr || accepted_) return PostResult::NotAwaiting;
    if (!human_relay(*pending_, slot)) return PostResult::Invalid;
    accepted_ = slot;
    cv_.notify_all();
    return PostResult::Accepted;
}

bool HumanRelayPlanner::awaiting() const {
    std::lock_guard lock(mu_);
    return pending_ != nullptr && !accepted_ && !closed_;
}

void HumanRelayPlanner::close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    cv_.notify_all();
}

}  // namespace flab
