#include "frontier_lab/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "frontier_lab/nav.hpp"

namespace flab {

double utility_score_raw(const OccupancyGrid& observed, Pose center, const SensorConfig& sensor, double path_cells,
                         VisibilityScratch* scratch) {
    VisibilityScratch local;
    VisibilityScratch& s = scratch ? *scratch : local;
    const auto cells = observed.cells();
    std::size_t unknown = 0;
    s.for_each_visible(observed, center, sensor, [&](std::size_t i) { unknown += cells[i] == CellState::Unknown; });
    return static_cast<double>(unknown) / std::max(path_cells, 1.0);
}

double prediction_score_raw(const ProbabilityGrid& mean_map, const Grid<double>& variance, Pose center,
                            const SensorConfig& sensor, double path_cells, double tau, VisibilityScratch* scratch) {
    require_same_shape(mean_map, variance, "mean/variance");
    VisibilityScratch local;
    VisibilityScratch& s = scratch ? *scratch : local;
    const auto var = variance.cells();
    double sum = 0.0;
    s.for_each_visible(mean_map, center, sensor, tau, [&](std::size_t i) { sum += var[i]; });
    return sum / std::max(path_cells, 1.0);
}

std::vector<double> minmax_normalize(std::span<const double> raw) {
    std::vector<double> out(raw.size(), 0.5);
    if (raw.empty()) return out;
    const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) return out;
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = std::clamp((raw[i] - *lo) / range, 0.0, 1.0);
    return out;
}

namespace {

void fill_raw(Frontier& f, const OccupancyGrid& observed, const PredictionBundle& bundle, double path_cells,
              const ScoringConfig& cfg, VisibilityScratch& scratch) {
    f.path_cells = path_cells;
    f.path_length = path_cells * observed.resolution();
    const double dist = std::max(path_cells, 1.0);
    f.raw_utility = utility_score_raw(observed, f.center, cfg.sensor, path_cells, &scratch);
    f.unknown_count = f.raw_utility * dist;
    f.raw_prediction =
        prediction_score_raw(bundle.mean, bundle.variance, f.center, cfg.sensor, path_cells, cfg.tau, &scratch);
    f.variance_sum = f.raw_prediction * dist;
    f.scored = true;
}

template <typename Range>
void normalize_scores(Range& frontiers) {
    std::vector<double> u, p;
    for (const Frontier& f : frontiers) {
        u.push_back(f.raw_utility);
        p.push_back(f.raw_prediction);
    }
    const auto un = minmax_normalize(u), pn = minmax_normalize(p);
    std::size_t k = 0;
    for (Frontier& f : frontiers) {
        f.utility_score = un[k];
        f.prediction_score = pn[k];
        ++k;
    }
}

}  // namespace

void score_frontiers(std::vector<Frontier>& frontiers, const OccupancyGrid& observed, const PredictionBundle& bundle,
                     Pose robot, const ScoringConfig& cfg) {
    require_same_shape(observed, bundle.mean, "observed/prediction");
    if (frontiers.empty()) return;
    const DistanceField field(observed, robot);
    VisibilityScratch scratch;
    for (Frontier& f : frontiers) {
        if (!field.reachable(f.center)) {
            f.valid = false;
            continue;
        }
        fill_raw(f, observed, bundle, field.cost_cells(f.center), cfg, scratch);
    }
    std::erase_if(frontiers, [](const Frontier& f) { return !f.valid; });
    normalize_scores(frontiers);
}

std::vector<float> FrontierFeatures::flatten() const {
    const std::size_t n = slots.size();
    std::vector<float> out(5 * n + 1, 0.0f);
    for (std::size_t i = 0; i < n; ++i) {
        out[2 * i] = static_cast<float>(slots[i].dx);
        out[2 * i + 1] = static_cast<float>(slots[i].dy);
        out[2 * n + i] = static_cast<float>(slots[i].utility);
        out[3 * n + i] = static_cast<float>(slots[i].prediction);
        out[4 * n + i] = static_cast<float>(slots[i].traj_norm);
    }
    out[5 * n] = static_cast<float>(budget_norm);
    return out;
}

FrontierFeatures score_action_set(ActionSet& set, const OccupancyGrid& observed, const PredictionBundle& bundle,
                                  Pose robot, int budget_remaining, const ScoringConfig& cfg) {
    const int n = set.capacity();
    bool need_field = false;
    for (const Frontier& f : set.slots) need_field |= f.valid && !f.scored;
    if (need_field) {
        const DistanceField field(observed, robot);
        VisibilityScratch scratch;
        for (Frontier& f : set.slots) {
            if (!f.valid || f.scored) continue;
            if (!field.reachable(f.center)) {
                f.valid = false;
                continue;
            }
            fill_raw(f, observed, bundle, field.cost_cells(f.center), cfg, scratch);
        }
    }
    // keep valid slots first, preserving their order
    std::stable_partition(set.slots.begin(), set.slots.end(), [](const Frontier& f) { return f.valid; });
    for (Frontier& f : set.slots) {
        if (!f.valid) f = Frontier{};
    }
    const int valid = set.valid_count();
    auto valid_range = std::span<Frontier>(set.slots.data(), static_cast<std::size_t>(valid));
    normalize_scores(valid_range);

    FrontierFeatures features;
    features.slots.resize(n);
    const double half = cfg.window / 2.0;
    const double budget_m = cfg.budget_meters(observed.resolution());
    for (int i = 0; i < valid; ++i) {
        const Frontier& f = set.slots[i];
        auto& s = features.slots[i];
        s.dx = std::clamp((f.center.x - robot.x) / half, -1.0, 1.0);
        s.dy = std::clamp((f.center.y - robot.y) / half, -1.0, 1.0);
        s.utility = f.utility_score;
        s.prediction = f.prediction_score;
        s.traj_norm = budget_m > 0.0 ? f.path_length / budget_m : 0.0;
    }
    features.budget_norm =
        cfg.budget_total > 0 ? std::clamp(static_cast<double>(budget_remaining) / cfg.budget_total, 0.0, 1.0) : 0.0;
    return features;
}

PlanningView compute_planning_view(const OccupancyGrid& observed, const PredictionBundle& bundle, Pose robot,
                                   int budget_remaining, const ScoringConfig& cfg, std::span<const Pose> excluded) {
    PlanningView view;
    auto frontiers = detect_frontiers(observed, cfg.min_frontier_size);
    view.detected = static_cast<int>(frontiers.size());
    if (!excluded.empty()) {
        std::erase_if(frontiers, [&](const Frontier& f) {
            return std::find(excluded.begin(), excluded.end(), f.center) != excluded.end();
        });
    }
    score_frontiers(frontiers, observed, bundle, robot, cfg);
    frontiers = deduplicate(std::move(frontiers), observed.resolution(), cfg.dedup_dist_m, cfg.dedup_score);
    view.after_dedup = static_cast<int>(frontiers.size());
    view.actions = build_action_set(std::move(frontiers), robot, cfg.window, cfg.slot_count);
    view.features = score_action_set(view.actions, observed, bundle, robot, budget_remaining, cfg);
    return view;
}

}  // namespace flab
