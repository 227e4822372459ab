#include "frontier_lab/metrics.hpp"

#include <algorithm>
#include <queue>

namespace flab {

BinaryGrid dilate(const BinaryGrid& grid, int kernel) {
    if (kernel < 1 || kernel % 2 == 0) throw ContractViolation("dilation kernel must be odd and positive");
    const int r = kernel / 2;
    if (r == 0) return grid;
    const int w = grid.width(), h = grid.height();
    // Separable: horizontal pass then vertical pass.
    BinaryGrid horizontal(w, h, 0, grid.resolution());
    for (int y = 0; y < h; ++y) {
        int last = -1 << 30;  // x of the most recent set cell
        for (int x = 0; x < w + r; ++x) {
            if (x < w && grid(x, y)) last = x;
            const int target = x - r;
            if (target >= 0 && target < w) {
                // set if any source in [target - r, target + r]; last is the max set index <= x
                horizontal(target, y) = last >= target - r;
            }
        }
    }
    BinaryGrid out(w, h, 0, grid.resolution());
    for (int x = 0; x < w; ++x) {
        int last = -1 << 30;
        for (int y = 0; y < h + r; ++y) {
            if (y < h && horizontal(x, y)) last = y;
            const int target = y - r;
            if (target >= 0 && target < h) out(x, target) = last >= target - r;
        }
    }
    return out;
}

BinaryGrid footprint(const OccupancyGrid& truth) {
    const int w = truth.width(), h = truth.height();
    std::vector<std::uint8_t> exterior(truth.size(), 0);
    std::queue<Pose> queue;
    auto seed = [&](int x, int y) {
        const auto i = truth.index(x, y);
        if (exterior[i] || truth(x, y) == CellState::Occupied) return;
        exterior[i] = 1;
        queue.push({x, y});
    };
    for (int x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    constexpr int dx[4] = {1, -1, 0, 0};
    constexpr int dy[4] = {0, 0, 1, -1};
    while (!queue.empty()) {
        const Pose p = queue.front();
        queue.pop();
        for (int k = 0; k < 4; ++k) {
            const int nx = p.x + dx[k], ny = p.y + dy[k];
            if (truth.in_bounds(nx, ny)) seed(nx, ny);
        }
    }
    BinaryGrid out(w, h, 0, truth.resolution());
    auto cells = out.cells();
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = !exterior[i];
    return out;
}

BinaryGrid masked_prediction(const ProbabilityGrid& mean_map, const OccupancyGrid& observed, double occ_threshold) {
    require_same_shape(mean_map, observed, "prediction/observed");
    BinaryGrid out(observed.width(), observed.height(), 0, observed.resolution());
    auto dst = out.cells();
    const auto obs = observed.cells();
    const auto mean = mean_map.cells();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = obs[i] == CellState::Unknown ? mean[i] >= occ_threshold : obs[i] == CellState::Occupied;
    }
    return out;
}

IoUEvaluator::IoUEvaluator(const OccupancyGrid& truth, IoUConfig cfg)
    : cfg_(cfg),
      truth_occupied_(truth.width(), truth.height(), 0, truth.resolution()),
      footprint_(footprint(truth)) {
    auto g = truth_occupied_.cells();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = truth.cells()[i] == CellState::Occupied;
    truth_dilated_ = dilate(truth_occupied_, cfg_.kernel);
}

IoUReport IoUEvaluator::report(const ProbabilityGrid& mean_map, const OccupancyGrid& observed) const {
    require_same_shape(truth_occupied_, observed, "truth/observed");
    IoUReport r;
    r.masked_prediction = masked_prediction(mean_map, observed, cfg_.occ_threshold);
    r.corrected_prediction = r.masked_prediction;
    const auto fp_mask = footprint_.cells();
    auto pc = r.corrected_prediction.cells();
    for (std::size_t i = 0; i < pc.size(); ++i) pc[i] = pc[i] && fp_mask[i];
    const BinaryGrid pd = dilate(r.masked_prediction, cfg_.kernel);
    const auto pm = r.masked_prediction.cells();
    const auto pdc = pd.cells();
    const auto g = truth_occupied_.cells();
    const auto gd = truth_dilated_.cells();
    for (std::size_t i = 0; i < pm.size(); ++i) {
        r.tp += pdc[i] && g[i];
        r.fp += pm[i] && pc[i] && !gd[i];
        r.fn += !pdc[i] && g[i];
    }
    const std::int64_t denom = r.tp + r.fp + r.fn;
    r.iou = denom > 0 ? static_cast<double>(r.tp) / static_cast<double>(denom) : 1.0;
    return r;
}

double IoUEvaluator::iou(const ProbabilityGrid& mean_map, const OccupancyGrid& observed) const {
    return report(mean_map, observed).iou;
}

IoUReport dilated_iou(const ProbabilityGrid& mean_map, const OccupancyGrid& observed, const OccupancyGrid& truth,
                      const IoUConfig& cfg) {
    require_same_shape(mean_map, truth, "prediction/truth");
    require_same_shape(observed, truth, "observed/truth");
    return IoUEvaluator(truth, cfg).report(mean_map, observed);
}

double training_reward(double iou, int budget_remaining, bool terminal) {
    if (!terminal) return 0.0;
    // scaled before subtracting so that e.g. 0.95 -> 950 - 400 is exact
    return std::max(0.0, iou * 1000.0 - kIouClip * 1000.0) + budget_remaining;
}

double study_reward(double iou, int budget_remaining) { return iou * 1000.0 + budget_remaining; }

}  // namespace flab
