#include "frontier_lab/service.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>

namespace flab::service {

// --------------------------------------------------------------------------- codec

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = (std::uint8_t(bytes[i]) << 16) | (std::uint8_t(bytes[i + 1]) << 8) | std::uint8_t(bytes[i + 2]);
        out += kAlphabet[v >> 18];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    if (i + 1 == bytes.size()) {
        const std::uint32_t v = std::uint8_t(bytes[i]) << 16;
        out += kAlphabet[v >> 18];
        out += kAlphabet[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const std::uint32_t v = (std::uint8_t(bytes[i]) << 16) | (std::uint8_t(bytes[i + 1]) << 8);
        out += kAlphabet[v >> 18];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::string base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw std::invalid_argument("base64 length is not a multiple of 4");
    std::string out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int v[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=' && i + 4 == text.size() && k >= 2) {
                v[k] = 0;
                ++pad;
            } else if (pad > 0 || (v[k] = b64_value(c)) < 0) {
                throw std::invalid_argument("invalid base64 character");
            }
        }
        const std::uint32_t w = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
        out += static_cast<char>(w >> 16);
        if (pad < 2) out += static_cast<char>((w >> 8) & 0xff);
        if (pad < 1) out += static_cast<char>(w & 0xff);
    }
    return out;
}

std::string rle_encode(std::span<const std::uint8_t> values) {
    std::string out;
    std::size_t i = 0;
    while (i < values.size()) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i] && j - i < 0xffffffffu) ++j;
        const auto run = static_cast<std::uint32_t>(j - i);
        for (int b = 0; b < 4; ++b) out += static_cast<char>((run >> (8 * b)) & 0xff);
        out += static_cast<char>(values[i]);
        i = j;
    }
    return out;
}

std::vector<std::uint8_t> rle_decode(std::string_view bytes) {
    if (bytes.size() % 5 != 0) throw std::invalid_argument("RLE payload is not a whole number of runs");
    std::vector<std::uint8_t> out;
    for (std::size_t i = 0; i < bytes.size(); i += 5) {
        std::uint32_t run = 0;
        for (int b = 0; b < 4; ++b) run |= static_cast<std::uint32_t>(std::uint8_t(bytes[i + b])) << (8 * b);
        if (run == 0) throw std::invalid_argument("RLE run of length zero");
        out.insert(out.end(), run, static_cast<std::uint8_t>(bytes[i + 4]));
    }
    return out;
}

std::uint8_t quantize_probability(double p) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(p, 0.0, 1.0) * 255.0));
}

std::uint8_t quantize_variance(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v / 0.25, 0.0, 1.0) * 255.0));
}

nlohmann::json encode_grid(int width, int height, std::span<const std::uint8_t> values) {
    if (static_cast<std::size_t>(width) * height != values.size()) throw ContractViolation("grid payload size mismatch");
    return {{"width", width}, {"height", height}, {"encoding", "rle32-b64"}, {"data", base64_encode(rle_encode(values))}};
}

std::vector<std::uint8_t> decode_grid(const nlohmann::json& grid, int* width, int* height) {
    const int w = grid.at("width").get<int>(), h = grid.at("height").get<int>();
    if (grid.at("encoding").get<std::string>() != "rle32-b64") throw std::invalid_argument("unknown grid encoding");
    auto values = rle_decode(base64_decode(grid.at("data").get<std::string>()));
    if (values.size() != static_cast<std::size_t>(w) * h) throw std::invalid_argument("decoded grid has the wrong size");
    if (width) *width = w;
    if (height) *height = h;
    return values;
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// --------------------------------------------------------------------------- rounds and snapshots

std::string to_string(RoundStatus s) {
    switch (s) {
        case RoundStatus::Pending: return "pending";
        case RoundStatus::AwaitingChoice: return "awaiting_choice";
        case RoundStatus::Moving: return "moving";
        case RoundStatus::Terminal: return "terminal";
    }
    return "pending";
}

std::vector<RoundPlan> plan_rounds(const ServiceConfig& cfg, const std::vector<MapSource>& maps, std::uint64_t seed) {
    std::vector<RoundPlan> plans;
    auto add = [&](bool training, const MapSource& map, Pose start) {
        RoundPlan p;
        p.index = static_cast<int>(plans.size());
        p.training = training;
        p.map = map;
        p.start = start;
        p.config = cfg.base;
        p.config.map = map;
        p.config.start = start;
        p.config.planner = "human";
        p.config.seed = hash_combine(seed, static_cast<std::uint64_t>(p.index));
        plans.push_back(std::move(p));
    };
    {
        const auto truth = load_truth(cfg.training_map);
        add(true, cfg.training_map, sample_start_poses(*truth, 1, hash_combine(seed, 0xface), cfg.base.start_margin_m)[0]);
    }
    for (std::size_t m = 0; m < maps.size(); ++m) {
        const auto truth = load_truth(maps[m]);
        // Two distinct draws: the shared start and the changed one.
        const auto starts = sample_start_poses(*truth, 2, hash_combine(seed, m + 1), cfg.base.start_margin_m);
        for (int r = 0; r < cfg.rounds_per_map; ++r) add(false, maps[m], r + 1 < cfg.rounds_per_map ? starts[0] : starts[1]);
    }
    return plans;
}

nlohmann::json make_snapshot(const Episode& episode, const std::string& session, int round, RoundStatus status,
                             std::uint64_t seq) {
    const EpisodeState& s = episode.state();
    const int w = s.observed.width(), h = s.observed.height();
    std::vector<std::uint8_t> observed(s.observed.size()), mean(s.observed.size()), variance(s.observed.size());
    for (std::size_t i = 0; i < observed.size(); ++i) {
        observed[i] = static_cast<std::uint8_t>(s.observed.cells()[i]);
        mean[i] = quantize_probability(episode.bundle().mean.cells()[i]);
        variance[i] = quantize_variance(episode.bundle().variance.cells()[i]);
    }
    nlohmann::json trajectory = nlohmann::json::array();
    for (Pose p : s.trajectory) trajectory.push_back({p.x, p.y});
    nlohmann::json frontiers = nlohmann::json::array();
    if (status == RoundStatus::AwaitingChoice) {
        const ActionSet& actions = episode.view().actions;
        for (int i = 0; i < actions.capacity(); ++i) {
            if (!actions.is_valid(i)) continue;
            const Frontier& f = actions.slots[i];
            frontiers.push_back({{"slot", i},
                                 {"center", {f.center.x, f.center.y}},
                                 {"utility", f.utility_score},
                                 {"prediction", f.prediction_score},
                                 {"path_length_m", f.path_length}});
        }
    }
    nlohmann::json snap = {{"session", session},
                           {"round", round},
                           {"seq", seq},
                           {"status", to_string(status)},
                           {"width", w},
                           {"height", h},
                           {"resolution", s.observed.resolution()},
                           {"observed", encode_grid(w, h, observed)},
                           {"mean", encode_grid(w, h, mean)},
                           {"variance", encode_grid(w, h, variance)},
                           {"robot", {s.pose.x, s.pose.y}},
                           {"trajectory", trajectory},
                           {"frontiers", frontiers},
                           {"b_r", s.budget_remaining},
                           {"budget", s.budget_total},
                           {"iou", episode.iou()},
                           {"terminal", episode.terminal()}};
    if (episode.terminal()) {
        snap["termination"] = to_string(episode.termination());
        snap["study_reward"] = study_reward(episode.iou(), s.budget_remaining);
        snap["training_reward"] = training_reward(episode.iou(), s.budget_remaining, true);
    }
    return snap;
}

std::string snapshot_hash(const nlohmann::json& snapshot) {
    nlohmann::json copy = snapshot;
    copy.erase("seq");
    return fnv1a_hex(copy.dump());
}

// --------------------------------------------------------------------------- subscriptions

void Subscription::push(std::string event) {
    {
        std::lock_guard lock(mu_);
        if (closed_) return;
        events_.push_back(std::move(event));
    }
    cv_.notify_all();
}

std::optional<std::string> Subscription::next(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return !events_.empty() || closed_; });
    if (events_.empty()) return std::nullopt;
    std::string e = std::move(events_.front());
    events_.pop_front();
    return e;
}

void Subscription::close() {
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    cv_.notify_all();
}

bool Subscription::closed() const {
    std::lock_guard lock(mu_);
    return closed_ && events_.empty();
}

// --------------------------------------------------------------------------- sessions

namespace {

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

}  // namespace

struct RoundRuntime {
    RoundPlan plan;
    RoundStatus status = RoundStatus::Pending;
    nlohmann::json snapshot;
    std::uint64_t seq = 0;
    std::optional<int> pending_choice;
    std::optional<EpisodeResult> result;
    std::vector<std::shared_ptr<Subscription>> subscribers;
};

class Session {
public:
    Session(std::string id, std::string participant, std::vector<RoundPlan> plans, int pacing_ms)
        : id_(std::move(id)), participant_(std::move(participant)), pacing_ms_(pacing_ms), created_ms_(now_ms()) {
        for (auto& p : plans) {
            RoundRuntime r;
            r.plan = std::move(p);
            rounds_.push_back(std::move(r));
        }
        worker_ = std::thread([this] { run(); });
    }

    ~Session() {
        {
            std::lock_guard lock(mu_);
            stopping_ = true;
            for (auto& r : rounds_)
                for (auto& s : r.subscribers) s->close();
        }
        cv_.notify_all();
        if (worker_.joinable()) worker_.join();
    }

    nlohmann::json describe() const {
        std::lock_guard lock(mu_);
        nlohmann::json rounds = nlohmann::json::array();
        for (const auto& r : rounds_) {
            nlohmann::json jr = {{"round", r.plan.index},
                                 {"training", r.plan.training},
                                 {"map", r.plan.map.id()},
                                 {"start", {r.plan.start.x, r.plan.start.y}},
                                 {"status", to_string(r.status)}};
            if (r.result) {
                jr["iou"] = r.result->final_iou;
                jr["study_reward"] = r.result->study_reward;
            }
            rounds.push_back(jr);
        }
        return {{"id", id_}, {"participant", participant_}, {"active_round", active_}, {"rounds", rounds}};
    }

    nlohmann::json state(int round) const {
        std::lock_guard lock(mu_);
        const RoundRuntime& r = at(round);
        if (r.status == RoundStatus::Pending || r.snapshot.is_null()) {
            throw ServiceError(409, "round_not_active", "round " + std::to_string(round) + " has not started");
        }
        return r.snapshot;
    }

    nlohmann::json submit(int round, const nlohmann::json& body) {
        int slot = 0;
        if (!body.is_object() || !body.contains("frontier") || !body.at("frontier").is_number_integer()) {
            throw ServiceError(400, "bad_request", "body must be {\"frontier\": <slot index>}");
        }
        slot = body.at("frontier").get<int>();
        {
            std::lock_guard lock(mu_);
            RoundRuntime& r = at(round);
            switch (r.status) {
                case RoundStatus::Pending: throw ServiceError(409, "round_not_active", "round has not started");
                case RoundStatus::Moving: throw ServiceError(409, "robot_moving", "the robot is still executing a choice");
                case RoundStatus::Terminal: throw ServiceError(409, "round_terminal", "the round is over");
                case RoundStatus::AwaitingChoice: break;
            }
            if (!human_relay(current_actions_, slot)) {
                throw ServiceError(400, "invalid_frontier", "slot " + std::to_string(slot) + " is not a valid frontier");
            }
            choices_.push_back({{"type", "choice"},
                                {"round", round},
                                {"step", step_index_},
                                {"frontier", slot},
                                {"timestamp_ms", now_ms()},
                                {"snapshot_hash", snapshot_hash(r.snapshot)}});
            r.pending_choice = slot;
            r.status = RoundStatus::Moving;
            // Readers see the acceptance at once rather than a stale choice prompt.
            nlohmann::json accepted = r.snapshot;
            accepted["status"] = to_string(RoundStatus::Moving);
            accepted["frontiers"] = nlohmann::json::array();
            accepted["seq"] = ++r.seq;
            publish_locked(r, std::move(accepted));
        }
        cv_.notify_all();
        return {{"accepted", true}, {"round", round}, {"frontier", slot}};
    }

    std::shared_ptr<Subscription> subscribe(int round) {
        auto sub = std::make_shared<Subscription>();
        std::lock_guard lock(mu_);
        RoundRuntime& r = at(round);
        if (!r.snapshot.is_null()) sub->push(r.snapshot.dump());
        if (r.status == RoundStatus::Terminal || stopping_) {
            sub->close();
        } else {
            r.subscribers.push_back(sub);
        }
        return sub;
    }

    void unsubscribe(int round, const std::shared_ptr<Subscription>& sub) {
        std::lock_guard lock(mu_);
        auto& subs = at(round).subscribers;
        subs.erase(std::remove(subs.begin(), subs.end(), sub), subs.end());
    }

    std::string export_log() const {
        std::lock_guard lock(mu_);
        nlohmann::json plans = nlohmann::json::array();
        for (const auto& r : rounds_) {
            plans.push_back({{"round", r.plan.index},
                             {"training", r.plan.training},
                             {"map", r.plan.map.id()},
                             {"start", {r.plan.start.x, r.plan.start.y}},
                             {"config", r.plan.config}});
        }
        std::string out = nlohmann::json{{"type", "header"},
                                         {"format", 1},
                                         {"session", id_},
                                         {"participant", participant_},
                                         {"created_ms", created_ms_},
                                         {"rounds", plans}}
                              .dump() +
                          "\n";
        for (const auto& c : choices_) out += c.dump() + "\n";
        for (const auto& r : rounds_) {
            if (!r.result) continue;
            out += nlohmann::json{{"type", "round_result"},
                                  {"round", r.plan.index},
                                  {"study_reward", r.result->study_reward},
                                  {"iou", r.result->final_iou},
                                  {"b_r", r.result->b_r},
                                  {"result", *r.result}}
                       .dump() +
                   "\n";
        }
        return out;
    }

    bool wait_for(int round, RoundStatus status, std::chrono::milliseconds timeout) const {
        std::unique_lock lock(mu_);
        const RoundRuntime& r = at(round);
        return cv_.wait_for(lock, timeout, [&] { return r.status == status || stopping_; }) && r.status == status;
    }

private:
    const RoundRuntime& at(int round) const {
        if (round < 0 || round >= static_cast<int>(rounds_.size())) {
            throw ServiceError(404, "unknown_round", "round " + std::to_string(round) + " does not exist");
        }
        return rounds_[round];
    }
    RoundRuntime& at(int round) { return const_cast<RoundRuntime&>(std::as_const(*this).at(round)); }

    // Caller holds mu_.
    void publish_locked(RoundRuntime& r, nlohmann::json snapshot) {
        r.snapshot = std::move(snapshot);
        const std::string text = r.snapshot.dump();
        for (auto& s : r.subscribers) s->push(text);
        if (r.status == RoundStatus::Terminal) {
            for (auto& s : r.subscribers) s->close();
            r.subscribers.clear();
        }
    }

    void run() {
        for (std::size_t k = 0; k < rounds_.size(); ++k) {
            RoundRuntime& r = rounds_[k];
            const int round = static_cast<int>(k);
            std::unique_ptr<Episode> episode;
            try {
                episode = std::make_unique<Episode>(r.plan.config, load_truth(r.plan.map), r.plan.start, true, "human");
            } catch (const std::exception&) {
                std::lock_guard lock(mu_);
                r.status = RoundStatus::Terminal;
                cv_.notify_all();
                continue;
            }
            {
                std::lock_guard lock(mu_);
                if (stopping_) return;
                active_ = round;
                step_index_ = 0;
            }
            while (true) {
                std::unique_lock lock(mu_);
                if (stopping_) return;
                if (!episode->terminal() && episode->view().actions.valid_count() == 0) {
                    lock.unlock();
                    episode->apply(NoAction{});
                    lock.lock();
                }
                if (episode->terminal()) {
                    r.status = RoundStatus::Terminal;
                    r.result = episode->result();
                    publish_locked(r, make_snapshot(*episode, id_, round, r.status, ++r.seq));
                    cv_.notify_all();
                    break;
                }
                r.status = RoundStatus::AwaitingChoice;
                current_actions_ = episode->view().actions;
                publish_locked(r, make_snapshot(*episode, id_, round, r.status, ++r.seq));
                cv_.notify_all();
                cv_.wait(lock, [&] { return r.pending_choice.has_value() || stopping_; });
                if (stopping_) return;
                const int slot = *r.pending_choice;
                r.pending_choice.reset();
                ++step_index_;
                lock.unlock();

                episode->apply(FrontierChoice{slot}, [&](const EpisodeState&) {
                    if (pacing_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(pacing_ms_));
                    auto snap = make_snapshot(*episode, id_, round, RoundStatus::Moving, 0);
                    std::lock_guard inner(mu_);
                    snap["seq"] = ++r.seq;
                    publish_locked(r, std::move(snap));
                    return false;
                });
            }
        }
    }

    std::string id_;
    std::string participant_;
    int pacing_ms_;
    std::int64_t created_ms_;
    mutable std::mutex mu_;
    mutable std::condition_variable cv_;
    std::vector<RoundRuntime> rounds_;
    std::vector<nlohmann::json> choices_;
    ActionSet current_actions_;
    int active_ = 0;
    int step_index_ = 0;
    bool stopping_ = false;
    std::thread worker_;
};

SessionManager::SessionManager(ServiceConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.maps.empty()) throw ConfigError("the service needs at least one study map");
    if (cfg_.rounds_per_map < 1) throw ConfigError("rounds_per_map must be at least 1");
    if (cfg_.pacing_ms < 0) throw ConfigError("pacing must be non-negative");
    cfg_.base.validate();
}

SessionManager::~SessionManager() {
    std::map<std::string, std::shared_ptr<Session>> sessions;
    {
        std::lock_guard lock(mu_);
        sessions.swap(sessions_);
    }
    sessions.clear();
}

std::shared_ptr<Session> SessionManager::find(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError(404, "unknown_session", "no session '" + id + "'");
    return it->second;
}

nlohmann::json SessionManager::create_session(const nlohmann::json& request) {
    if (!request.is_null() && !request.is_object()) throw ServiceError(400, "bad_request", "body must be a JSON object");
    const nlohmann::json req = request.is_null() ? nlohmann::json::object() : request;
    std::vector<MapSource> maps;
    if (req.contains("maps")) {
        if (!req.at("maps").is_array() || req.at("maps").empty()) {
            throw ServiceError(400, "invalid_maps", "maps must be a non-empty array of map ids");
        }
        for (const auto& m : req.at("maps")) {
            if (!m.is_string()) throw ServiceError(400, "invalid_maps", "map ids are strings");
            const auto it = std::find_if(cfg_.maps.begin(), cfg_.maps.end(),
                                         [&](const MapSource& s) { return s.id() == m.get<std::string>(); });
            if (it == cfg_.maps.end()) throw ServiceError(400, "invalid_map", "unknown map id '" + m.get<std::string>() + "'");
            maps.push_back(*it);
        }
    } else {
        maps.assign(cfg_.maps.begin(), cfg_.maps.begin() + std::min<std::size_t>(3, cfg_.maps.size()));
    }
    std::uint64_t seed = cfg_.seed;
    if (req.contains("seed")) {
        if (!req.at("seed").is_number_unsigned()) throw ServiceError(400, "bad_request", "seed must be a non-negative integer");
        seed = req.at("seed").get<std::uint64_t>();
    }
    const std::string participant = req.value("participant", std::string("anonymous"));
    auto plans = plan_rounds(cfg_, maps, seed);

    std::string id;
    {
        std::lock_guard lock(mu_);
        id = "s" + std::to_string(next_id_++);
    }
    auto session = std::make_shared<Session>(id, participant, std::move(plans), cfg_.pacing_ms);
    {
        std::lock_guard lock(mu_);
        sessions_[id] = session;
    }
    return session->describe();
}

nlohmann::json SessionManager::describe(const std::string& id) const { return find(id)->describe(); }

nlohmann::json SessionManager::get_state(const std::string& id, int round) const { return find(id)->state(round); }

nlohmann::json SessionManager::submit_choice(const std::string& id, int round, const nlohmann::json& body) {
    return find(id)->submit(round, body);
}

std::shared_ptr<Subscription> SessionManager::subscribe(const std::string& id, int round) {
    return find(id)->subscribe(round);
}

void SessionManager::unsubscribe(const std::string& id, int round, const std::shared_ptr<Subscription>& sub) {
    find(id)->unsubscribe(round, sub);
}

std::string SessionManager::export_session(const std::string& id) const { return find(id)->export_log(); }

std::vector<std::string> SessionManager::session_ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> ids;
    for (const auto& [id, s] : sessions_) ids.push_back(id);
    return ids;
}

bool SessionManager::wait_for(const std::string& id, int round, RoundStatus status,
                              std::chrono::milliseconds timeout) const {
    return find(id)->wait_for(round, status, timeout);
}

// --------------------------------------------------------------------------- replay

std::vector<ReplayOutcome> replay_session(std::istream& export_jsonl) {
    std::map<int, EpisodeConfig> configs;
    std::map<int, std::deque<int>> choices;
    std::vector<std::pair<int, EpisodeResult>> recorded;
    std::string line;
    bool header = false;
    while (std::getline(export_jsonl, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        const std::string type = j.at("type").get<std::string>();
        if (type == "header") {
            header = true;
            for (const auto& r : j.at("rounds")) configs[r.at("round").get<int>()] = r.at("config").get<EpisodeConfig>();
        } else if (type == "choice") {
            choices[j.at("round").get<int>()].push_back(j.at("frontier").get<int>());
        } else if (type == "round_result") {
            recorded.emplace_back(j.at("round").get<int>(), j.at("result").get<EpisodeResult>());
        }
    }
    if (!header) throw ConfigError("session log has no header");
    std::vector<ReplayOutcome> out;
    for (auto& [round, rec] : recorded) {
        const auto it = configs.find(round);
        if (it == configs.end()) throw ConfigError("session log has no config for round " + std::to_string(round));
        const EpisodeConfig& cfg = it->second;
        HumanRelayPlanner relay(choices[round]);
        relay.close();  // once the recorded choices run out, stop instead of waiting
        Episode episode(cfg, load_truth(cfg.map), *cfg.start, true, "human");
        ReplayOutcome o;
        o.round = round;
        o.recorded = rec;
        o.replayed = run_episode(episode, relay);
        o.matches = nlohmann::json(o.recorded).dump() == nlohmann::json(o.replayed).dump();
        out.push_back(std::move(o));
    }
    return out;
}

}  // namespace flab::service
