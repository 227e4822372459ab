#pragma once

#include <functional>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frontier_lab/episode.hpp"

namespace flab {

struct MeanCI {
    double mean = 0.0;
    double half_width = 0.0;  // 1.96 * sample sd / sqrt(n); 0 for n < 2
    int n = 0;
};

MeanCI mean_ci95(std::span<const double> values);

struct BenchmarkConfig {
    EpisodeConfig base;
    std::vector<MapSource> maps;
    int starts_per_map = 15;
    std::vector<std::string> planners{"nearest", "mapex", "random"};
    std::uint64_t seed = 0;
    int jobs = 1;
    /// Called after each finished episode, possibly from worker threads.
    std::function<void(const struct BenchmarkRun&, const Episode&)> on_finished;
};

struct BenchmarkRun {
    std::size_t map_index = 0;
    std::string map_id;
    int start_index = 0;
    Pose start;
    std::uint64_t starts_hash = 0;
    std::string planner;
    std::optional<EpisodeResult> result;
    std::string error;  // set when the run failed
};

struct BenchmarkSummaryRow {
    std::string map_id;  // "all" for the cross-map row
    std::string planner;
    int n = 0;
    int failures = 0;
    MeanCI reward;
    MeanCI iou;
    MeanCI study_reward;
    std::uint64_t starts_hash = 0;  // 0 on the cross-map row
};

struct BenchmarkResult {
    std::vector<BenchmarkRun> runs;  // ordered by (map, start, planner)
    std::vector<BenchmarkSummaryRow> summary;
};

/// Start poses are drawn once per map and shared by every planner; each
/// (map, start) pair also shares its episode seed across planners.
BenchmarkResult run_benchmark(const BenchmarkConfig& cfg);

std::vector<BenchmarkSummaryRow> summarize(const std::vector<BenchmarkRun>& runs);

void write_runs_jsonl(const BenchmarkResult& result, const std::filesystem::path& path);
void write_summary_csv(const BenchmarkResult& result, const std::filesystem::path& path);

}  // namespace flab
