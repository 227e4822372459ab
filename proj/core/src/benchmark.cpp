#include "frontier_lab/benchmark.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

namespace flab {

MeanCI mean_ci95(std::span<const double> values) {
    MeanCI ci;
    ci.n = static_cast<int>(values.size());
    if (values.empty()) return ci;
    double sum = 0.0;
    for (double v : values) sum += v;
    ci.mean = sum / ci.n;
    if (ci.n < 2) return ci;
    double ss = 0.0;
    for (double v : values) ss += (v - ci.mean) * (v - ci.mean);
    ci.half_width = 1.96 * std::sqrt(ss / (ci.n - 1)) / std::sqrt(static_cast<double>(ci.n));
    return ci;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& cfg) {
    if (cfg.starts_per_map < 1) throw ConfigError("starts_per_map must be at least 1");
    if (cfg.maps.empty()) throw ConfigError("benchmark needs at least one map");
    if (cfg.planners.empty()) throw ConfigError("benchmark needs at least one planner");
    cfg.base.validate();

    BenchmarkResult result;
    std::vector<std::shared_ptr<const OccupancyGrid>> truths;
    for (std::size_t m = 0; m < cfg.maps.size(); ++m) {
        auto truth = load_truth(cfg.maps[m]);
        const auto starts = sample_start_poses(*truth, cfg.starts_per_map, hash_combine(cfg.seed, m),
                                               cfg.base.start_margin_m);
        const std::uint64_t h = starts_hash(starts);
        for (int s = 0; s < cfg.starts_per_map; ++s) {
            for (const auto& planner : cfg.planners) {
                BenchmarkRun run;
                run.map_index = m;
                run.map_id = cfg.maps[m].id();
                run.start_index = s;
                run.start = starts[s];
                run.starts_hash = h;
                run.planner = planner;
                result.runs.push_back(std::move(run));
            }
        }
        truths.push_back(std::move(truth));
    }

    auto execute = [&](BenchmarkRun& run) {
        try {
            EpisodeConfig ec = cfg.base;
            ec.map = cfg.maps[run.map_index];
            ec.start = run.start;
            ec.planner = run.planner;
            ec.seed = hash_combine(hash_combine(cfg.seed, run.map_index), static_cast<std::uint64_t>(run.start_index));
            auto planner = make_planner(ec);
            Episode episode(ec, truths[run.map_index], run.start, planner->uses_frontiers(), planner->name());
            run.result = run_episode(episode, *planner);
            if (cfg.on_finished) cfg.on_finished(run, episode);
        } catch (const std::exception& e) {
            run.error = e.what();
        }
    };

    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        for (auto& run : result.runs) execute(run);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < result.runs.size(); i = next++) execute(result.runs[i]);
            });
        }
        for (auto& t : pool) t.join();
    }
    result.summary = summarize(result.runs);
    return result;
}

std::vector<BenchmarkSummaryRow> summarize(const std::vector<BenchmarkRun>& runs) {
    struct Acc {
        std::vector<double> reward, iou, study;
        int failures = 0;
        std::uint64_t hash = 0;
    };
    // Keys keep first-appearance order so the CSV follows the run order.
    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::pair<std::string, std::string>, Acc> acc;
    auto add = [&](const std::string& map, const std::string& planner, const BenchmarkRun& r, std::uint64_t hash) {
        const auto key = std::make_pair(map, planner);
        auto [it, fresh] = acc.try_emplace(key);
        if (fresh) order.push_back(key);
        it->second.hash = hash;
        if (!r.result) {
            ++it->second.failures;
            return;
        }
        it->second.reward.push_back(r.result->training_reward);
        it->second.iou.push_back(r.result->final_iou);
        it->second.study.push_back(r.result->study_reward);
    };
    for (const auto& r : runs) add(r.map_id, r.planner, r, r.starts_hash);
    for (const auto& r : runs) add("all", r.planner, r, 0);

    std::vector<BenchmarkSummaryRow> out;
    for (const auto& key : order) {
        const Acc& a = acc.at(key);
        out.push_back({key.first, key.second, static_cast<int>(a.reward.size()), a.failures, mean_ci95(a.reward),
                       mean_ci95(a.iou), mean_ci95(a.study), a.hash});
    }
    return out;
}

void write_runs_jsonl(const BenchmarkResult& result, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    for (const auto& r : result.runs) {
        nlohmann::json j = {{"map", r.map_id},
                            {"map_index", r.map_index},
                            {"start_index", r.start_index},
                            {"start", {r.start.x, r.start.y}},
                            {"starts_hash", r.starts_hash},
                            {"planner", r.planner}};
        if (r.result) {
            j["result"] = *r.result;
        } else {
            j["error"] = r.error;
        }
        os << j.dump() << '\n';
    }
}

void write_summary_csv(const BenchmarkResult& result, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << "map,planner,n,failures,reward_mean,reward_ci95,iou_mean,iou_ci95,study_reward_mean,study_reward_ci95,"
          "starts_hash\n";
    char line[512];
    for (const auto& s : result.summary) {
        std::snprintf(line, sizeof line, "%s,%s,%d,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%016llx\n", s.map_id.c_str(),
                      s.planner.c_str(), s.n, s.failures, s.reward.mean, s.reward.half_width, s.iou.mean,
                      s.iou.half_width, s.study_reward.mean, s.study_reward.half_width,
                      static_cast<unsigned long long>(s.starts_hash));
        os << line;
    }
}

}  // namespace flab
