#include <benchmark/benchmark.h>

#include "frontier_lab/episode.hpp"
#include "frontier_lab/frontier.hpp"
#include "frontier_lab/metrics.hpp"
#include "frontier_lab/nav.hpp"
#include "frontier_lab/predictor.hpp"
#include "frontier_lab/sensor.hpp"

namespace {

using namespace flab;

struct Fixture {
    std::shared_ptr<const OccupancyGrid> truth;
    Pose start;
    OccupancyGrid observed;

    explicit Fixture(int side) {
        truth = load_truth(MapSource{"", 4, side, side, side / 25});
        start = sample_start_poses(*truth, 1, 9)[0];
        observed = OccupancyGrid(truth->width(), truth->height(), CellState::Unknown, truth->resolution());
        sense_into(*truth, start, SensorConfig{}, observed);
    }
};

void BM_Raycast(benchmark::State& state) {
    const Fixture f(static_cast<int>(state.range(0)));
    SensorConfig cfg;
    cfg.beam_count = static_cast<int>(state.range(1));
    for (auto _ : state) {
        OccupancyGrid observed(f.truth->width(), f.truth->height(), CellState::Unknown, f.truth->resolution());
        benchmark::DoNotOptimize(sense_into(*f.truth, f.start, cfg, observed));
    }
}
BENCHMARK(BM_Raycast)->Args({150, 2500})->Args({400, 2500})->Args({400, 720})->Unit(benchmark::kMicrosecond);

void BM_AStar(benchmark::State& state) {
    const Fixture f(static_cast<int>(state.range(0)));
    // Far corner of the known free space.
    Pose goal = f.start;
    for (int y = 0; y < f.observed.height(); ++y)
        for (int x = 0; x < f.observed.width(); ++x)
            if (f.observed(x, y) == CellState::Free &&
                std::abs(x - f.start.x) + std::abs(y - f.start.y) > std::abs(goal.x - f.start.x) + std::abs(goal.y - f.start.y))
                goal = {x, y};
    for (auto _ : state) benchmark::DoNotOptimize(astar(f.observed, f.start, goal));
}
BENCHMARK(BM_AStar)->Arg(150)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_FrontierDetection(benchmark::State& state) {
    const Fixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(detect_frontiers(f.observed));
}
BENCHMARK(BM_FrontierDetection)->Arg(150)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_DilatedIoU(benchmark::State& state) {
    const Fixture f(static_cast<int>(state.range(0)));
    const IoUEvaluator eval(*f.truth);
    const auto bundle = predict(f.observed, default_ensemble(), f.truth.get());
    for (auto _ : state) benchmark::DoNotOptimize(eval.iou(bundle.mean, f.observed));
}
BENCHMARK(BM_DilatedIoU)->Arg(150)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_EnsemblePrediction(benchmark::State& state) {
    const Fixture f(static_cast<int>(state.range(0)));
    const auto members = default_ensemble();
    for (auto _ : state) benchmark::DoNotOptimize(predict(f.observed, members, f.truth.get()));
}
BENCHMARK(BM_EnsemblePrediction)->Arg(150)->Arg(400)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
