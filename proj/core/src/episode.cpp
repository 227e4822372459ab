#include "frontier_lab/episode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "frontier_lab/rl/checkpoint.hpp"
#include "frontier_lab/rl/policy_planners.hpp"

namespace flab {

std::string to_string(Termination t) {
    switch (t) {
        case Termination::None: return "none";
        case Termination::IouTarget: return "iou_target";
        case Termination::Budget: return "budget";
        case Termination::NoAction: return "no_action";
        case Termination::Stalled: return "stalled";
    }
    return "none";
}

namespace {

Termination termination_from_string(const std::string& s) {
    for (auto t : {Termination::None, Termination::IouTarget, Termination::Budget, Termination::NoAction,
                   Termination::Stalled}) {
        if (to_string(t) == s) return t;
    }
    throw ConfigError("unknown termination '" + s + "'");
}

nlohmann::json pose_json(Pose p) { return nlohmann::json::array({p.x, p.y}); }
Pose pose_from(const nlohmann::json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

}  // namespace

void to_json(nlohmann::json& j, const StepRecord& r) {
    j = {{"index", r.index},         {"pose", pose_json(r.pose)}, {"decision", r.decision},
         {"slot", r.slot},           {"direction", r.direction},  {"goal", pose_json(r.goal)},
         {"utility", r.utility},     {"prediction", r.prediction}, {"path_m", r.path_m},
         {"valid_slots", r.valid_slots}, {"timesteps", r.timesteps}, {"collision", r.collision},
         {"new_cells", r.new_cells}, {"iou", r.iou},              {"b_r", r.b_r}};
}

void from_json(const nlohmann::json& j, StepRecord& r) {
    r.index = j.at("index").get<int>();
    r.pose = pose_from(j.at("pose"));
    r.decision = j.at("decision").get<std::string>();
    r.slot = j.at("slot").get<int>();
    r.direction = j.at("direction").get<int>();
    r.goal = pose_from(j.at("goal"));
    r.utility = j.at("utility").get<double>();
    r.prediction = j.at("prediction").get<double>();
    r.path_m = j.at("path_m").get<double>();
    r.valid_slots = j.at("valid_slots").get<int>();
    r.timesteps = j.at("timesteps").get<int>();
    r.collision = j.at("collision").get<bool>();
    r.new_cells = j.at("new_cells").get<std::size_t>();
    r.iou = j.at("iou").get<double>();
    r.b_r = j.at("b_r").get<int>();
}

void to_json(nlohmann::json& j, const EpisodeResult& r) {
    nlohmann::json traj = nlohmann::json::array();
    for (Pose p : r.trajectory) traj.push_back(pose_json(p));
    j = {{"map", r.map_id},
         {"planner", r.planner},
         {"start", pose_json(r.start)},
         {"budget", r.budget},
         {"steps_used", r.steps_used},
         {"b_r", r.b_r},
         {"final_iou", r.final_iou},
         {"training_reward", r.training_reward},
         {"study_reward", r.study_reward},
         {"distance_m", r.distance_m},
         {"termination", to_string(r.termination)},
         {"steps", r.steps},
         {"trajectory", traj}};
}

void from_json(const nlohmann::json& j, EpisodeResult& r) {
    r.map_id = j.at("map").get<std::string>();
    r.planner = j.at("planner").get<std::string>();
    r.start = pose_from(j.at("start"));
    r.budget = j.at("budget").get<int>();
    r.steps_used = j.at("steps_used").get<int>();
    r.b_r = j.at("b_r").get<int>();
    r.final_iou = j.at("final_iou").get<double>();
    r.training_reward = j.at("training_reward").get<double>();
    r.study_reward = j.at("study_reward").get<double>();
    r.distance_m = j.at("distance_m").get<double>();
    r.termination = termination_from_string(j.at("termination").get<std::string>());
    r.steps = j.at("steps").get<std::vector<StepRecord>>();
    r.trajectory.clear();
    for (const auto& p : j.at("trajectory")) r.trajectory.push_back(pose_from(p));
}

std::shared_ptr<const OccupancyGrid> load_truth(const MapSource& source) {
    if (!source.file.empty()) return std::make_shared<const OccupancyGrid>(load_map(source.file));
    return std::make_shared<const OccupancyGrid>(
        generate_floorplan(source.seed, source.width, source.height, source.rooms));
}

namespace {

// 1D squared distance transform of a sampled function (lower envelope of parabolas).
void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == inf) continue;
        if (k < 0) {
            v[0] = q;
            z[0] = -inf;
            z[1] = inf;
            k = 0;
            continue;
        }
        double s;
        while (true) {
            s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) / (2.0 * (q - v[k]));
            if (s <= z[k] && k > 0) {
                --k;
                continue;
            }
            break;
        }
        if (s <= z[k]) {  // k == 0: the new parabola dominates everywhere
            v[0] = q;
            z[0] = -inf;
            z[1] = inf;
            continue;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = inf;
    }
    if (k < 0) {
        std::fill(d, d + n, inf);
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < q) ++j;
        const double dq = q - v[j];
        d[q] = dq * dq + f[v[j]];
    }
}

}  // namespace

std::vector<double> squared_distance_to_non_free(const OccupancyGrid& grid) {
    const int w = grid.width(), h = grid.height();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> g(grid.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = grid.cells()[i] == CellState::Free ? inf : 0.0;
    const int n = std::max(w, h);
    std::vector<double> f(n), d(n);
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = g[grid.index(x, y)];
        edt_1d(f.data(), d.data(), h, v, z);
        for (int y = 0; y < h; ++y) g[grid.index(x, y)] = d[y];
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f[x] = g[grid.index(x, y)];
        edt_1d(f.data(), d.data(), w, v, z);
        for (int x = 0; x < w; ++x) g[grid.index(x, y)] = d[x];
    }
    return g;
}

std::vector<Pose> sample_start_poses(const OccupancyGrid& truth, int count, std::uint64_t seed, double margin_m) {
    if (count < 1) throw ContractViolation("need at least one start pose");
    const auto dist2 = squared_distance_to_non_free(truth);
    const double margin = margin_m / truth.resolution();
    std::vector<Pose> candidates, any_free;
    for (int y = 0; y < truth.height(); ++y) {
        for (int x = 0; x < truth.width(); ++x) {
            if (truth(x, y) != CellState::Free) continue;
            any_free.push_back({x, y});
            // the map edge counts as a wall
            const double edge = std::min({x + 1, y + 1, truth.width() - x, truth.height() - y});
            if (dist2[truth.index(x, y)] >= margin * margin && edge >= margin) candidates.push_back({x, y});
        }
    }
    if (candidates.empty()) candidates = std::move(any_free);
    if (candidates.empty()) throw LayoutError("map has no Free cell to start from");
    Rng rng(seed);
    std::vector<Pose> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        const std::size_t remaining = candidates.size() - (static_cast<std::size_t>(i) % candidates.size());
        const std::size_t base = candidates.size() - remaining;
        const std::size_t pick = base + rng.uniform_int(remaining);
        std::swap(candidates[base], candidates[pick]);
        out.push_back(candidates[base]);
    }
    return out;
}

std::uint64_t starts_hash(const std::vector<Pose>& starts) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto eat = [&](std::int32_t v) {
        for (int b = 0; b < 4; ++b) {
            h ^= static_cast<std::uint8_t>(static_cast<std::uint32_t>(v) >> (8 * b));
            h *= 0x100000001b3ULL;
        }
    };
    for (Pose p : starts) {
        eat(p.x);
        eat(p.y);
    }
    return h;
}

Episode::Episode(const EpisodeConfig& cfg, std::shared_ptr<const OccupancyGrid> truth, Pose start,
                 bool frontier_actions, std::string planner_name)
    : cfg_(cfg),
      scoring_(cfg.scoring()),
      frontier_actions_(frontier_actions),
      planner_name_(std::move(planner_name)),
      start_(start),
      ensemble_(cfg.predictors),
      evaluator_(*truth, cfg.iou) {
    cfg_.validate();
    if (!truth->in_bounds(start) || (*truth)[start] != CellState::Free) {
        throw ContractViolation("start pose must be a Free cell of the map");
    }
    state_ = EpisodeState::start(std::move(truth), start, cfg.budget, cfg.sensor);
    refresh();
}

void Episode::refresh() {
    bundle_ = ensemble_.predict(state_.observed, state_.truth.get());
    iou_ = evaluator_.iou(bundle_.mean, state_.observed);
    if (iou_ >= cfg_.iou_target) {
        termination_ = Termination::IouTarget;
    } else if (state_.budget_remaining <= 0) {
        termination_ = Termination::Budget;
    } else if (frontier_actions_) {
        view_ = compute_planning_view(state_.observed, bundle_, state_.pose, state_.budget_remaining, scoring_,
                                      excluded_);
    }
}

PlanningContext Episode::context() const {
    PlanningContext ctx;
    ctx.view = frontier_actions_ ? &view_ : nullptr;
    ctx.observed = &state_.observed;
    ctx.bundle = &bundle_;
    ctx.robot = state_.pose;
    ctx.budget_remaining = state_.budget_remaining;
    ctx.budget_total = state_.budget_total;
    ctx.step_cells = cfg_.step_cells;
    return ctx;
}

void Episode::settle_after_motion() {
    if (iou_ >= cfg_.iou_target) {
        termination_ = Termination::IouTarget;
    } else if (state_.budget_remaining <= 0) {
        termination_ = Termination::Budget;
    } else if (zero_progress_ >= cfg_.max_zero_progress) {
        termination_ = Termination::Stalled;
    } else {
        refresh();
    }
}

const StepRecord& Episode::apply(const PlannerDecision& decision, const TimestepHook& on_timestep) {
    if (terminal()) throw ContractViolation("episode is already terminal");
    StepRecord rec;
    rec.index = static_cast<int>(steps_.size());
    rec.pose = state_.pose;
    rec.goal = state_.pose;
    rec.decision = describe(decision);
    rec.valid_slots = frontier_actions_ ? view_.actions.valid_count() : 0;

    const TimestepHook hook = [&](const EpisodeState& s) {
        iou_ = evaluator_.iou(bundle_.mean, s.observed);
        if (on_timestep) on_timestep(s);
        return iou_ >= cfg_.iou_target;
    };

    if (std::holds_alternative<NoAction>(decision)) {
        termination_ = Termination::NoAction;
    } else if (const auto* choice = std::get_if<FrontierChoice>(&decision)) {
        if (!frontier_actions_ || !view_.actions.is_valid(choice->slot)) {
            throw ContractViolation("decision names an invalid frontier slot");
        }
        const Frontier& f = view_.actions.slots[choice->slot];
        rec.slot = choice->slot;
        rec.goal = f.center;
        rec.utility = f.utility_score;
        rec.prediction = f.prediction_score;
        rec.path_m = f.path_length;
        if (!cfg_.replan_every_step) {
            const auto path = astar(state_.observed, state_.pose, f.center);
            if (path) {
                const AdvanceResult adv = advance(state_, *path, cfg_.step_cells, hook);
                rec.timesteps = adv.timesteps;
                rec.new_cells = adv.newly_observed;
            }
        } else {
            // One timestep per plan; the goal stays fixed for the whole decision.
            bool stop = false;
            while (!stop && state_.budget_remaining > 0) {
                const auto path = astar(state_.observed, state_.pose, f.center);
                if (!path || path->waypoints.size() <= 1) break;
                const AdvanceResult adv = advance(state_, *path, cfg_.step_cells, [&](const EpisodeState& s) {
                    stop = hook(s);
                    return true;
                });
                rec.timesteps += adv.timesteps;
                rec.new_cells += adv.newly_observed;
                if (adv.timesteps == 0) break;
            }
        }
        if (rec.timesteps == 0) {
            excluded_.push_back(f.center);
            ++zero_progress_;
        } else {
            excluded_.clear();
            zero_progress_ = 0;
        }
        settle_after_motion();
    } else {
        const auto move = std::get<PrimitiveMove>(decision);
        const Pose off = direction_offset(move.direction);
        rec.direction = static_cast<int>(move.direction);
        const OccupancyGrid& truth = *state_.truth;
        std::vector<Pose> cells;
        for (int k = 1; k <= cfg_.step_cells; ++k) {
            const Pose c{state_.pose.x + off.x * k, state_.pose.y + off.y * k};
            if (!truth.in_bounds(c) || truth[c] != CellState::Free) {
                rec.collision = true;
                break;
            }
            cells.push_back(c);
        }
        rec.goal = rec.collision ? state_.pose : cells.back();
        if (state_.budget_remaining > 0) {
            if (!rec.collision) {
                for (Pose c : cells) state_.trajectory.push_back(c);
                state_.distance_m +=
                    cfg_.step_cells * (off.x != 0 && off.y != 0 ? std::numbers::sqrt2 : 1.0) * truth.resolution();
                state_.pose = rec.goal;
            }
            --state_.budget_remaining;
            rec.timesteps = 1;
            rec.new_cells = sense_into(truth, state_.pose, state_.sensor, state_.observed);
            hook(state_);
        }
        settle_after_motion();
    }
    rec.iou = iou_;
    rec.b_r = state_.budget_remaining;
    steps_.push_back(rec);
    return steps_.back();
}

EpisodeResult Episode::result() const {
    EpisodeResult r;
    r.map_id = cfg_.map.id();
    r.planner = planner_name_;
    r.start = start_;
    r.budget = state_.budget_total;
    r.b_r = state_.budget_remaining;
    r.steps_used = state_.budget_total - state_.budget_remaining;
    r.final_iou = iou_;
    r.training_reward = training_reward(iou_, r.b_r, true);
    r.study_reward = study_reward(iou_, r.b_r);
    r.distance_m = state_.distance_m;
    r.termination = termination_;
    r.steps = steps_;
    r.trajectory = state_.trajectory;
    return r;
}

namespace {

std::shared_ptr<const rl::LoadedCheckpoint> cached_checkpoint(const std::string& path) {
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<const rl::LoadedCheckpoint>> cache;
    std::lock_guard lock(mu);
    const auto key = std::filesystem::weakly_canonical(path).string() + "@" +
                     std::to_string(std::filesystem::last_write_time(path).time_since_epoch().count());
    auto& slot = cache[key];
    if (!slot) slot = std::make_shared<const rl::LoadedCheckpoint>(rl::load_checkpoint(path));
    return slot;
}

rl::PreprocessSpec checkpoint_preprocess(const rl::LoadedCheckpoint& ckpt, const rl::PreprocessSpec& fallback) {
    const auto& extra = ckpt.manifest.value("extra", nlohmann::json::object());
    return extra.contains("preprocess") ? extra.at("preprocess").get<rl::PreprocessSpec>() : fallback;
}

}  // namespace

std::unique_ptr<Planner> make_planner(const EpisodeConfig& cfg) {
    const std::string& kind = cfg.planner;
    if (kind == "nearest") return std::make_unique<NearestPlanner>();
    if (kind == "mapex") return std::make_unique<MapexPlanner>(cfg.mapex);
    if (kind == "random") return std::make_unique<RandomPlanner>(hash_combine(cfg.seed, 0x72616e64ULL));
    if (kind == "human") return std::make_unique<HumanRelayPlanner>();
    if (kind == "rl" || kind == "primitive") {
        if (kind == "rl" && cfg.checkpoint.empty()) throw ConfigError("the rl planner needs a checkpoint");
        if (!cfg.checkpoint.empty()) {
            auto ckpt = cached_checkpoint(cfg.checkpoint);
            const auto spec = checkpoint_preprocess(*ckpt, cfg.preprocess);
            std::shared_ptr<const rl::SacAgent<float>> agent(ckpt, ckpt->agent.get());
            const int actions = agent->shape().actions;
            if (kind == "rl") {
                if (actions != cfg.slot_count) throw ConfigError("checkpoint slot count differs from slot_count");
                return std::make_unique<rl::RlPlanner>(agent, spec);
            }
            if (actions != kDirectionCount) throw ConfigError("checkpoint is not a primitive-motion policy");
            return std::make_unique<rl::PrimitivePlanner>(agent, spec);
        }
        rl::EncoderSpec enc = cfg.encoder;
        enc.input_side = cfg.preprocess.output_side();
        enc.input_channels = cfg.preprocess.channels;
        auto agent = std::make_shared<const rl::SacAgent<float>>(rl::primitive_network_shape(enc, cfg.hidden),
                                                                 rl::SacConfig{}, hash_combine(cfg.seed, 0x7072696dULL));
        return std::make_unique<rl::PrimitivePlanner>(std::move(agent), cfg.preprocess);
    }
    throw ConfigError("unknown planner '" + kind + "'");
}

EpisodeResult run_episode(Episode& episode, Planner& planner) {
    while (!episode.terminal()) episode.apply(planner.decide(episode.context()));
    return episode.result();
}

EpisodeResult run_episode(const EpisodeConfig& cfg, const std::function<void(const Episode&)>& on_finished) {
    cfg.validate();
    auto truth = load_truth(cfg.map);
    const Pose start = cfg.start ? *cfg.start
                                 : sample_start_poses(*truth, 1, hash_combine(cfg.seed, 0x7374617274ULL),
                                                      cfg.start_margin_m)[0];
    auto planner = make_planner(cfg);
    Episode episode(cfg, std::move(truth), start, planner->uses_frontiers(), planner->name());
    auto result = run_episode(episode, *planner);
    if (on_finished) on_finished(episode);
    return result;
}

}  // namespace flab
