#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>

#include "frontier_lab/benchmark.hpp"
#include "frontier_lab/exploration_env.hpp"
#include "frontier_lab/http_server.hpp"
#include "frontier_lab/render.hpp"
#include "frontier_lab/rl/checkpoint.hpp"

namespace {

using flab::EpisodeConfig;
using flab::MapSource;
using nlohmann::json;
namespace fs = std::filesystem;

// Flags that override the episode section of the config file.
struct EpisodeFlags {
    std::optional<std::string> map_file;
    std::optional<std::uint64_t> map_seed;
    std::optional<int> map_width, map_height, rooms;
    std::vector<int> start;
    std::optional<int> budget, step_cells, beams, num_frontiers, min_frontier_size, window, encoder_channels;
    std::optional<double> range_m, dedup_dist_m, dedup_score, tau, iou_target, mapex_lambda, start_margin_m;
    std::optional<std::string> planner, checkpoint;
    bool replan_every_step = false;

    void attach(CLI::App* app) {
        app->add_option("--map", map_file, "Map raster (PGM); omit for a generated floorplan");
        app->add_option("--map-seed", map_seed, "Floorplan generator seed");
        app->add_option("--map-width", map_width, "Generated map width in cells");
        app->add_option("--map-height", map_height, "Generated map height in cells");
        app->add_option("--rooms", rooms, "Generated map room count");
        app->add_option("--start", start, "Start cell X Y")->expected(2);
        app->add_option("--start-margin-m", start_margin_m, "Clearance for sampled start poses");
        app->add_option("--budget", budget, "Budget in timesteps");
        app->add_option("--step-cells", step_cells, "Path cells advanced per timestep");
        app->add_option("--beams", beams, "Sensor beam count");
        app->add_option("--range-m", range_m, "Sensor range in meters");
        app->add_option("--num-frontiers", num_frontiers, "Frontier slots offered to planners");
        app->add_option("--min-frontier-size", min_frontier_size, "Smallest frontier cluster kept");
        app->add_option("--dedup-dist-m", dedup_dist_m, "Frontier deduplication distance");
        app->add_option("--dedup-score", dedup_score, "Frontier deduplication score gap");
        app->add_option("--tau", tau, "Probabilistic raycast occupancy cutoff");
        app->add_option("--window", window, "Side of the frontier window in cells");
        app->add_option("--planner", planner, "Planner")
            ->check(CLI::IsMember({"nearest", "mapex", "random", "primitive", "rl", "human"}));
        app->add_option("--mapex-lambda", mapex_lambda, "Variance weight of the MapEx-style planner");
        app->add_option("--checkpoint", checkpoint, "Policy checkpoint for rl/primitive planners");
        app->add_option("--encoder-channels", encoder_channels, "Encoder input channels: mean, +observed, +variance")
            ->check(CLI::Range(1, 3));
        app->add_option("--iou-target", iou_target, "IoU that ends an episode early");
        app->add_flag("--replan-every-step", replan_every_step, "Replan the path after every timestep");
    }

    void apply(EpisodeConfig& c) const {
        if (map_file) c.map.file = *map_file;
        if (map_seed) c.map.seed = *map_seed;
        if (map_width) c.map.width = *map_width;
        if (map_height) c.map.height = *map_height;
        if (rooms) c.map.rooms = *rooms;
        if (start.size() == 2) c.start = flab::Pose{start[0], start[1]};
        if (start_margin_m) c.start_margin_m = *start_margin_m;
        if (budget) c.budget = *budget;
        if (step_cells) c.step_cells = *step_cells;
        if (beams) c.sensor.beam_count = *beams;
        if (range_m) c.sensor.range_m = *range_m;
        if (num_frontiers) c.slot_count = *num_frontiers;
        if (min_frontier_size) c.min_frontier_size = *min_frontier_size;
        if (dedup_dist_m) c.dedup_dist_m = *dedup_dist_m;
        if (dedup_score) c.dedup_score = *dedup_score;
        if (tau) c.tau = *tau;
        if (window) c.window = *window;
        if (planner) c.planner = *planner;
        if (mapex_lambda) c.mapex.lambda = *mapex_lambda;
        if (checkpoint) c.checkpoint = *checkpoint;
        if (encoder_channels) c.preprocess.channels = *encoder_channels;
        if (iou_target) c.iou_target = *iou_target;
        if (replan_every_step) c.replan_every_step = true;
    }
};

// Map list shared by benchmark, train and serve: explicit files plus generated floorplans.
struct MapFlags {
    std::vector<std::string> files;
    std::optional<int> generated;
    std::optional<std::uint64_t> first_seed;

    void attach(CLI::App* app) {
        app->add_option("--maps", files, "Map rasters");
        app->add_option("--generated", generated, "Number of generated floorplans")->check(CLI::PositiveNumber);
        app->add_option("--first-map-seed", first_seed, "Seed of the first generated floorplan");
    }

    // File section "maps": list of map objects; flags replace it when given.
    std::vector<MapSource> resolve(const json& doc, const EpisodeConfig& base, int default_generated) const {
        std::vector<MapSource> maps;
        if (!files.empty() || generated) {
            for (const auto& f : files) {
                MapSource m = base.map;
                m.file = f;
                maps.push_back(m);
            }
            if (generated) append_generated(maps, base, *generated);
            return maps;
        }
        if (doc.contains("maps")) return doc.at("maps").get<std::vector<MapSource>>();
        append_generated(maps, base, default_generated);
        return maps;
    }

    void append_generated(std::vector<MapSource>& maps, const EpisodeConfig& base, int count) const {
        const std::uint64_t seed0 = first_seed.value_or(base.map.seed);
        for (int i = 0; i < count; ++i) {
            MapSource m = base.map;
            m.file.clear();
            m.seed = seed0 + static_cast<std::uint64_t>(i);
            maps.push_back(m);
        }
    }
};

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    EpisodeFlags episode;

    void attach(CLI::App* app, bool with_out = true) {
        app->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
        app->add_option("--seed", seed, "Seed (else the config file, else FRONTIER_LAB_SEED, else 0)");
        if (with_out) app->add_option("--out", out_dir, "Output directory (default: a fresh runs/<timestamp>)");
        episode.attach(app);
    }

    json document() const { return config_path.empty() ? json::object() : flab::read_json_file(config_path); }

    // Config file, then flags, then the seed fallback chain.
    EpisodeConfig episode_config(const json& doc) const {
        EpisodeConfig cfg;
        if (doc.contains("episode")) cfg = doc.at("episode").get<EpisodeConfig>();
        episode.apply(cfg);
        std::optional<std::uint64_t> explicit_seed = seed;
        if (!explicit_seed && doc.contains("seed")) explicit_seed = doc.at("seed").get<std::uint64_t>();
        cfg.seed = flab::resolve_seed(explicit_seed);
        return cfg;
    }

    fs::path output_dir() const {
        if (out_dir) {
            fs::create_directories(*out_dir);
            return *out_dir;
        }
        return flab::make_run_dir(flab::runs_root());
    }
};

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

void render_episode(const flab::Episode& episode, const fs::path& path) {
    flab::write_png(flab::render_trajectory(episode.state().observed, episode.state().trajectory), path);
}

int cmd_explore(const Common& common, bool render) {
    const json doc = common.document();
    const EpisodeConfig cfg = common.episode_config(doc);
    const fs::path dir = common.output_dir();
    const auto result = flab::run_episode(cfg, [&](const flab::Episode& episode) {
        if (render) render_episode(episode, dir / "trajectory.png");
    });

    flab::BenchmarkResult table;
    flab::BenchmarkRun run;
    run.map_id = cfg.map.id();
    run.start = result.start;
    run.starts_hash = flab::starts_hash({result.start});
    run.planner = result.planner;
    run.result = result;
    table.runs.push_back(run);
    table.summary = flab::summarize(table.runs);
    flab::write_runs_jsonl(table, dir / "episodes.jsonl");
    flab::write_summary_csv(table, dir / "summary.csv");
    write_json(dir / "config.json", cfg);

    std::cout << json{{"map", result.map_id},
                      {"planner", result.planner},
                      {"termination", flab::to_string(result.termination)},
                      {"final_iou", result.final_iou},
                      {"b_r", result.b_r},
                      {"steps_used", result.steps_used},
                      {"training_reward", result.training_reward},
                      {"study_reward", result.study_reward},
                      {"out", dir.string()}}
                     .dump()
              << "\n";
    return 0;
}

struct BenchmarkFlags {
    MapFlags maps;
    std::optional<int> starts_per_map, jobs;
    std::vector<std::string> planners;
    bool render = false;
};

int cmd_benchmark(const Common& common, const BenchmarkFlags& flags) {
    const json doc = common.document();
    const json section = doc.value("benchmark", json::object());
    flab::BenchmarkConfig cfg;
    cfg.base = common.episode_config(doc);
    cfg.seed = cfg.base.seed;
    cfg.maps = flags.maps.resolve(section, cfg.base, 5);
    cfg.starts_per_map = flags.starts_per_map.value_or(section.value("starts_per_map", cfg.starts_per_map));
    cfg.planners = !flags.planners.empty() ? flags.planners : section.value("planners", cfg.planners);
    cfg.jobs = flags.jobs.value_or(section.value("jobs", cfg.jobs));

    const fs::path dir = common.output_dir();
    if (flags.render) {
        fs::create_directories(dir / "renders");
        cfg.on_finished = [dir](const flab::BenchmarkRun& run, const flab::Episode& episode) {
            render_episode(episode, dir / "renders" /
                                        (run.map_id + "-s" + std::to_string(run.start_index) + "-" + run.planner + ".png"));
        };
    }
    const auto result = flab::run_benchmark(cfg);
    flab::write_runs_jsonl(result, dir / "episodes.jsonl");
    flab::write_summary_csv(result, dir / "summary.csv");
    write_json(dir / "config.json", {{"episode", cfg.base},
                                     {"seed", cfg.seed},
                                     {"benchmark",
                                      {{"maps", cfg.maps},
                                       {"starts_per_map", cfg.starts_per_map},
                                       {"planners", cfg.planners},
                                       {"jobs", cfg.jobs}}}});
    for (const auto& row : result.summary) {
        std::printf("%-28s %-10s n=%-3d reward %9.2f ± %7.2f  iou %.4f ± %.4f%s\n", row.map_id.c_str(),
                    row.planner.c_str(), row.n, row.reward.mean, row.reward.half_width, row.iou.mean,
                    row.iou.half_width, row.failures ? "  (failures)" : "");
    }
    std::cout << "wrote " << (dir / "summary.csv").string() << "\n";
    return 0;
}

struct TrainFlags {
    MapFlags maps;
    std::optional<long> steps, checkpoint_every;
    std::optional<int> batch, learning_starts, buffer, gradient_steps;
    std::optional<double> lr;
    bool primitive = false;
};

int cmd_train(const Common& common, const TrainFlags& flags) {
    const json doc = common.document();
    const json section = doc.value("train", json::object());
    flab::TrainingJob job;
    job.base = common.episode_config(doc);
    job.seed = job.base.seed;
    job.maps = flags.maps.resolve(section, job.base, 10);
    if (section.contains("sac")) job.sac = section.at("sac").get<flab::rl::SacConfig>();
    if (flags.batch) job.sac.batch = *flags.batch;
    if (flags.learning_starts) job.sac.learning_starts = *flags.learning_starts;
    if (flags.buffer) job.sac.buffer_capacity = *flags.buffer;
    if (flags.gradient_steps) job.sac.gradient_steps = *flags.gradient_steps;
    if (flags.lr) job.sac.learning_rate = *flags.lr;
    job.primitive = flags.primitive || section.value("primitive", false);
    job.steps = flags.steps.value_or(section.value("steps", 10000L));
    job.checkpoint_every = flags.checkpoint_every.value_or(section.value("checkpoint_every", 0L));

    const fs::path dir = common.output_dir();
    job.checkpoint = dir / "checkpoint.flab";
    std::ofstream log(dir / "training.jsonl");
    job.log = &log;
    job.on_episode = [](const flab::rl::TrainingLogRecord& r) {
        if (r.episode % 10 == 0) {
            std::printf("episode %5ld  steps %7ld  iou %.3f  b_r %4d  reward %8.2f\n", static_cast<long>(r.episode),
                        static_cast<long>(r.steps), r.iou, r.b_r, r.reward);
            std::fflush(stdout);
        }
    };
    write_json(dir / "config.json", {{"episode", job.base},
                                     {"seed", job.seed},
                                     {"train",
                                      {{"maps", job.maps},
                                       {"sac", job.sac},
                                       {"primitive", job.primitive},
                                       {"steps", job.steps},
                                       {"checkpoint_every", job.checkpoint_every}}}});
    const auto out = flab::run_training(job);
    std::cout << json{{"steps", out.summary.steps},
                      {"episodes", out.summary.episodes},
                      {"updates", out.summary.updates},
                      {"checkpoint", job.checkpoint.string()}}
                     .dump()
              << "\n";
    return 0;
}

struct ScoreFlags {
    std::string prediction, observed, truth;
    std::optional<int> kernel;
    std::optional<double> occ_threshold;
};

int cmd_score(const ScoreFlags& f) {
    flab::IoUConfig cfg;
    if (f.kernel) cfg.kernel = *f.kernel;
    if (f.occ_threshold) cfg.occ_threshold = *f.occ_threshold;
    const auto prediction = flab::load_probability_map(f.prediction);
    const auto observed = flab::load_map(f.observed);
    const auto truth = flab::load_map(f.truth);
    const auto report = flab::dilated_iou(prediction, observed, truth, cfg);
    std::cout << json{{"iou", report.iou}, {"tp", report.tp}, {"fp", report.fp}, {"fn", report.fn}}.dump() << "\n";
    return 0;
}

std::atomic<flab::service::HttpServer*> g_server{nullptr};

extern "C" void on_signal(int) {
    if (auto* s = g_server.load()) s->stop();
}

struct ServeFlags {
    MapFlags maps;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<int> pacing_ms;
};

int cmd_serve(const Common& common, const ServeFlags& flags) {
    const json doc = common.document();
    const json section = doc.value("service", json::object());
    flab::service::ServiceConfig cfg;
    cfg.base = common.episode_config(doc);
    cfg.seed = cfg.base.seed;
    cfg.maps = flags.maps.resolve(section, cfg.base, 3);
    if (section.contains("training_map")) cfg.training_map = section.at("training_map").get<MapSource>();
    cfg.pacing_ms = flags.pacing_ms.value_or(section.value("pacing_ms", cfg.pacing_ms));

    flab::service::SessionManager manager(cfg);
    flab::service::HttpServer server(manager, flags.host, flags.port);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "serving " << cfg.maps.size() << " maps on http://" << flags.host << ":" << flags.port << std::endl;
    server.run();
    g_server = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frontier exploration lab: episodes, benchmarks, training and the study service"};
    app.require_subcommand(1);

    Common explore_common;
    bool explore_render = false;
    auto* explore = app.add_subcommand("explore", "Run one episode");
    explore_common.attach(explore);
    explore->add_flag("--render", explore_render, "Write trajectory.png");

    Common bench_common;
    BenchmarkFlags bench_flags;
    auto* bench = app.add_subcommand("benchmark", "Run planners over maps with shared start poses");
    bench_common.attach(bench);
    bench_flags.maps.attach(bench);
    bench->add_option("--starts-per-map", bench_flags.starts_per_map, "Start poses per map")
        ->check(CLI::PositiveNumber);
    bench->add_option("--planners", bench_flags.planners, "Planners to compare");
    bench->add_option("-j,--jobs", bench_flags.jobs, "Parallel episodes")->check(CLI::PositiveNumber);
    bench->add_flag("--render", bench_flags.render, "Write one PNG per run");

    Common train_common;
    TrainFlags train_flags;
    auto* train = app.add_subcommand("train", "Train a frontier-selection (or primitive-motion) policy");
    train_common.attach(train);
    train_flags.maps.attach(train);
    train->add_option("--steps", train_flags.steps, "Environment steps")->check(CLI::PositiveNumber);
    train->add_option("--checkpoint-every", train_flags.checkpoint_every, "Steps between checkpoints");
    train->add_option("--batch-size", train_flags.batch, "Minibatch size");
    train->add_option("--learning-starts", train_flags.learning_starts, "Steps before the first update");
    train->add_option("--buffer-size", train_flags.buffer, "Replay capacity");
    train->add_option("--gradient-steps", train_flags.gradient_steps, "Updates per environment step");
    train->add_option("--lr", train_flags.lr, "Adam learning rate");
    train->add_flag("--primitive", train_flags.primitive, "Train the 8-direction motion baseline");

    ScoreFlags score_flags;
    auto* score = app.add_subcommand("score", "Dilated IoU of a prediction raster");
    score->add_option("--prediction", score_flags.prediction, "Probability raster (PGM, 255 = occupied)")
        ->required()
        ->check(CLI::ExistingFile);
    score->add_option("--observed", score_flags.observed, "Observed map raster")->required()->check(CLI::ExistingFile);
    score->add_option("--truth", score_flags.truth, "Ground-truth map raster")->required()->check(CLI::ExistingFile);
    score->add_option("--kernel", score_flags.kernel, "Dilation kernel side");
    score->add_option("--occ-threshold", score_flags.occ_threshold, "Occupied threshold on the prediction");

    Common serve_common;
    ServeFlags serve_flags;
    auto* serve = app.add_subcommand("serve", "Serve the study sessions over HTTP");
    serve_common.attach(serve, false);
    serve_flags.maps.attach(serve);
    serve->add_option("--host", serve_flags.host, "Bind address");
    serve->add_option("--port", serve_flags.port, "Port");
    serve->add_option("--pacing-ms", serve_flags.pacing_ms, "Delay per executed timestep");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*explore) return cmd_explore(explore_common, explore_render);
        if (*bench) return cmd_benchmark(bench_common, bench_flags);
        if (*train) return cmd_train(train_common, train_flags);
        if (*score) return cmd_score(score_flags);
        if (*serve) return cmd_serve(serve_common, serve_flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
