#include <benchmark/benchmark.h>

#include "frontier_lab/rl/policy_planners.hpp"
#include "frontier_lab/rl/sac.hpp"

namespace {

using namespace flab;
using namespace flab::rl;

NetworkShape shape_for(int profile) {
    return profile == 0 ? frontier_network_shape(EncoderSpec::desk(), 10, 256)
                        : frontier_network_shape(EncoderSpec::full_size(), 10, 256);
}

std::vector<Observation> random_observations(const NetworkShape& s, int n, Rng& rng) {
    std::vector<Observation> out(n);
    for (auto& o : out) {
        o.image.resize(s.encoder.input_size());
        for (auto& v : o.image) v = static_cast<float>(rng.uniform());
        o.features.resize(s.feature_size);
        for (auto& v : o.features) v = static_cast<float>(rng.uniform());
        o.valid.assign(s.actions, 0);
        const int valid = 1 + static_cast<int>(rng.uniform_int(s.actions));
        for (int k = 0; k < valid; ++k) o.valid[k] = 1;
    }
    return out;
}

// Arg 0: desk encoder (32x32), 1: full-size encoder (128x128).
void BM_EncoderForward(benchmark::State& state) {
    const auto s = shape_for(static_cast<int>(state.range(0)));
    const int batch = static_cast<int>(state.range(1));
    SacAgent<float> agent(s, SacConfig{}, 1);
    Rng rng(2);
    const auto obs = random_observations(s, batch, rng);
    std::vector<const Observation*> ptrs;
    for (const auto& o : obs) ptrs.push_back(&o);
    const auto in = stack_inputs<float>(ptrs);
    for (auto _ : state) benchmark::DoNotOptimize(agent.actor().infer(in));
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_EncoderForward)->Args({0, 1})->Args({0, 256})->Args({1, 1})->Args({1, 32})->Unit(benchmark::kMillisecond);

void BM_SacUpdate(benchmark::State& state) {
    const auto s = shape_for(static_cast<int>(state.range(0)));
    SacConfig cfg;
    cfg.batch = static_cast<int>(state.range(1));
    SacAgent<float> agent(s, cfg, 1);
    Rng rng(3);
    ReplayBuffer buffer(512);
    const auto obs = random_observations(s, 64, rng);
    for (int i = 0; i < 512; ++i) {
        auto o = std::make_shared<const Observation>(obs[i % 64]);
        auto n = std::make_shared<const Observation>(obs[(i + 1) % 64]);
        buffer.push({o, static_cast<int>(rng.uniform_int(o->valid_count())), static_cast<float>(rng.uniform()), n, i % 7 == 0});
    }
    for (auto _ : state) {
        const auto b = make_batch<float>(buffer, buffer.sample_indices(cfg.batch, rng));
        benchmark::DoNotOptimize(agent.update(b));
    }
}
BENCHMARK(BM_SacUpdate)->Args({0, 256})->Args({1, 32})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
