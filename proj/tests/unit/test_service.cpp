#include <gtest/gtest.h>

#include <atomic>
#include <sstream>
#include <thread>

#include "frontier_lab/http_server.hpp"
#include "frontier_lab/service.hpp"

// After the Eigen-using headers: <resolv.h>, pulled in here, defines a `_res` macro.
#include <httplib.h>

using namespace flab;
using namespace flab::service;
using namespace std::chrono_literals;

namespace {

ServiceConfig small_service(int pacing_ms = 0) {
    ServiceConfig c;
    c.base.budget = 30;
    c.base.predictors = {OracleLeakPredictor{3, 1, 0.1}};
    c.maps = {MapSource{"", 21, 100, 100, 4}, MapSource{"", 22, 100, 100, 4}, MapSource{"", 23, 100, 100, 4}};
    c.training_map = MapSource{"", 20, 100, 100, 4};
    c.pacing_ms = pacing_ms;
    c.seed = 3;
    return c;
}

// Polls until the round shows one of the wanted statuses.
nlohmann::json await(const SessionManager& m, const std::string& id, int round,
                     std::initializer_list<const char*> statuses) {
    const auto deadline = std::chrono::steady_clock::now() + 30s;
    while (std::chrono::steady_clock::now() < deadline) {
        try {
            auto s = m.get_state(id, round);
            for (const char* want : statuses)
                if (s.at("status") == want) return s;
        } catch (const ServiceError& e) {
            if (e.code() != "round_not_active") throw;
        }
        std::this_thread::sleep_for(2ms);
    }
    throw std::runtime_error("timed out waiting for round " + std::to_string(round));
}

int first_slot(const nlohmann::json& snap) { return snap.at("frontiers").at(0).at("slot").get<int>(); }

// Chooses the first listed frontier until the round ends.
nlohmann::json play_round(SessionManager& m, const std::string& id, int round) {
    while (true) {
        auto s = await(m, id, round, {"awaiting_choice", "terminal"});
        if (s.at("terminal").get<bool>()) return s;
        m.submit_choice(id, round, {{"frontier", first_slot(s)}});
    }
}

std::vector<std::uint8_t> observed_bytes(const Episode& e) {
    std::vector<std::uint8_t> out;
    for (auto c : e.state().observed.cells()) out.push_back(static_cast<std::uint8_t>(c));
    return out;
}

int error_status(const std::function<void()>& fn, std::string* code = nullptr) {
    try {
        fn();
    } catch (const ServiceError& e) {
        if (code) *code = e.code();
        return e.status();
    }
    return 0;
}

}  // namespace

TEST(Codec, Base64KnownVectors) {
    EXPECT_EQ(base64_encode(""), "");
    EXPECT_EQ(base64_encode("f"), "Zg==");
    EXPECT_EQ(base64_encode("fo"), "Zm8=");
    EXPECT_EQ(base64_encode("foo"), "Zm9v");
    EXPECT_EQ(base64_encode("foobar"), "Zm9vYmFy");
    EXPECT_EQ(base64_decode("Zm9vYmE="), "fooba");
    EXPECT_THROW(base64_decode("Zm9"), std::invalid_argument);
    EXPECT_THROW(base64_decode("Zm9v!A=="), std::invalid_argument);
}

TEST(Codec, Base64RoundTripsArbitraryBytes) {
    Rng rng(1);
    for (int n = 0; n < 200; ++n) {
        std::string s(n, '\0');
        for (auto& c : s) c = static_cast<char>(rng.uniform_int(256));
        EXPECT_EQ(base64_decode(base64_encode(s)), s);
    }
}

TEST(Codec, RunLengthLayout) {
    const std::vector<std::uint8_t> v{7, 7, 7, 2};
    EXPECT_EQ(rle_encode(v), std::string("\x03\0\0\0\x07\x01\0\0\0\x02", 10));
    EXPECT_TRUE(rle_encode(std::vector<std::uint8_t>{}).empty());
    EXPECT_THROW(rle_decode(std::string("\x03\0\0", 3)), std::invalid_argument);
}

TEST(Codec, RunLengthRoundTrip) {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::uint8_t> v;
        const int runs = static_cast<int>(rng.uniform_int(40));
        for (int r = 0; r < runs; ++r) v.insert(v.end(), 1 + rng.uniform_int(700), static_cast<std::uint8_t>(rng.uniform_int(3)));
        EXPECT_EQ(rle_decode(rle_encode(v)), v);
    }
}

TEST(Codec, GridPayloadChecksShape) {
    std::vector<std::uint8_t> v(12, 1);
    v[5] = 200;
    const auto g = encode_grid(4, 3, v);
    int w = 0, h = 0;
    EXPECT_EQ(decode_grid(g, &w, &h), v);
    EXPECT_EQ(w, 4);
    EXPECT_EQ(h, 3);
    auto bad = g;
    bad["width"] = 5;
    EXPECT_THROW(decode_grid(bad), std::invalid_argument);
}

TEST(Codec, Quantization) {
    EXPECT_EQ(quantize_probability(0.0), 0);
    EXPECT_EQ(quantize_probability(0.5), 128);
    EXPECT_EQ(quantize_probability(1.0), 255);
    EXPECT_EQ(quantize_variance(0.0), 0);
    EXPECT_EQ(quantize_variance(0.125), 128);
    EXPECT_EQ(quantize_variance(0.25), 255);
    EXPECT_EQ(quantize_variance(0.4), 255);
    for (int i = 0; i <= 1000; ++i) EXPECT_LE(std::abs(quantize_probability(i / 1000.0) / 255.0 - i / 1000.0), 0.5 / 255 + 1e-12);
}

TEST(RoundPlan, ThreeMapsGiveTrainingPlusNine) {
    const auto cfg = small_service();
    const auto plans = plan_rounds(cfg, cfg.maps, 3);
    ASSERT_EQ(plans.size(), 10u);
    EXPECT_TRUE(plans[0].training);
    EXPECT_EQ(plans[0].map, cfg.training_map);
    for (int m = 0; m < 3; ++m) {
        const auto& r1 = plans[1 + 3 * m];
        const auto& r2 = plans[2 + 3 * m];
        const auto& r3 = plans[3 + 3 * m];
        EXPECT_FALSE(r1.training);
        EXPECT_EQ(r1.map, cfg.maps[m]);
        EXPECT_EQ(r2.map, cfg.maps[m]);
        EXPECT_EQ(r3.map, cfg.maps[m]);
        EXPECT_EQ(r1.start, r2.start);
        EXPECT_NE(r1.start, r3.start);
        const auto truth = load_truth(cfg.maps[m]);
        EXPECT_EQ((*truth)[r3.start], CellState::Free);
    }
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(plans[i].index, i);
        EXPECT_EQ(plans[i].config.planner, "human");
        ASSERT_TRUE(plans[i].config.start.has_value());
        EXPECT_EQ(*plans[i].config.start, plans[i].start);
    }
    EXPECT_EQ(plan_rounds(cfg, {cfg.maps[0]}, 3).size(), 4u);
}

TEST(Session, CreateValidatesAndAssignsDistinctIds) {
    SessionManager m(small_service());
    const auto a = m.create_session({{"participant", "p1"}});
    const auto b = m.create_session({{"maps", {m.config().maps[1].id()}}});
    EXPECT_NE(a.at("id"), b.at("id"));
    EXPECT_EQ(a.at("rounds").size(), 10u);
    EXPECT_EQ(b.at("rounds").size(), 4u);
    EXPECT_EQ(a.at("participant"), "p1");
    std::string code;
    EXPECT_EQ(error_status([&] { m.create_session({{"maps", {"nope"}}}); }, &code), 400);
    EXPECT_EQ(code, "invalid_map");
    EXPECT_EQ(error_status([&] { m.create_session({{"maps", nlohmann::json::array()}}); }), 400);
    EXPECT_EQ(error_status([&] { m.describe("missing"); }, &code), 404);
    EXPECT_EQ(code, "unknown_session");
    EXPECT_EQ(error_status([&] { m.get_state(a.at("id"), 42); }), 404);
}

TEST(Session, FreshRoundMatchesHarnessEpisode) {
    SessionManager m(small_service());
    const std::string id = m.create_session({}).at("id");
    const auto snap = await(m, id, 0, {"awaiting_choice"});
    EXPECT_EQ(snap.at("trajectory").size(), 1u);
    EXPECT_FALSE(snap.at("terminal").get<bool>());

    const auto plan = plan_rounds(m.config(), {m.config().maps.begin(), m.config().maps.end()}, 3)[0];
    Episode ep(plan.config, load_truth(plan.map), plan.start, true, "human");
    EXPECT_EQ(decode_grid(snap.at("observed")), observed_bytes(ep));
    std::vector<std::uint8_t> mean;
    for (double p : ep.bundle().mean.cells()) mean.push_back(quantize_probability(p));
    EXPECT_EQ(decode_grid(snap.at("mean")), mean);
    EXPECT_EQ(snap.at("iou").get<double>(), ep.iou());
    EXPECT_EQ(snap.at("b_r").get<int>(), plan.config.budget);

    std::vector<int> slots;
    for (int i = 0; i < ep.view().actions.capacity(); ++i)
        if (ep.view().actions.is_valid(i)) slots.push_back(i);
    ASSERT_EQ(snap.at("frontiers").size(), slots.size());
    for (std::size_t k = 0; k < slots.size(); ++k) {
        const auto& f = snap.at("frontiers")[k];
        const auto& want = ep.view().actions.slots[slots[k]];
        EXPECT_EQ(f.at("slot").get<int>(), slots[k]);
        EXPECT_EQ(f.at("center")[0].get<int>(), want.center.x);
        EXPECT_EQ(f.at("center")[1].get<int>(), want.center.y);
        EXPECT_EQ(f.at("utility").get<double>(), want.utility_score);
    }
}

TEST(Session, ChoiceAdvancesLikeTheHarness) {
    SessionManager m(small_service());
    const std::string id = m.create_session({}).at("id");
    const auto before = await(m, id, 0, {"awaiting_choice"});
    const int slot = first_slot(before);
    const auto ack = m.submit_choice(id, 0, {{"frontier", slot}});
    EXPECT_TRUE(ack.at("accepted").get<bool>());
    const auto after = await(m, id, 0, {"awaiting_choice", "terminal"});
    EXPECT_LT(after.at("b_r").get<int>(), before.at("b_r").get<int>());
    EXPECT_GT(after.at("seq").get<std::uint64_t>(), before.at("seq").get<std::uint64_t>());

    const auto plan = plan_rounds(m.config(), m.config().maps, 3)[0];
    Episode ep(plan.config, load_truth(plan.map), plan.start, true, "human");
    ep.apply(FrontierChoice{slot});
    EXPECT_EQ(after.at("b_r").get<int>(), ep.state().budget_remaining);
    EXPECT_EQ(after.at("iou").get<double>(), ep.iou());
    EXPECT_EQ(after.at("trajectory").size(), ep.state().trajectory.size());
    EXPECT_EQ(decode_grid(after.at("observed")), observed_bytes(ep));
}

TEST(Session, InvalidChoiceLeavesStateUnchanged) {
    SessionManager m(small_service());
    const std::string id = m.create_session({}).at("id");
    const auto before = await(m, id, 0, {"awaiting_choice"});
    std::string code;
    EXPECT_EQ(error_status([&] { m.submit_choice(id, 0, {{"frontier", 99}}); }, &code), 400);
    EXPECT_EQ(code, "invalid_frontier");
    EXPECT_EQ(error_status([&] { m.submit_choice(id, 0, {{"frontier", "x"}}); }, &code), 400);
    EXPECT_EQ(code, "bad_request");
    EXPECT_EQ(error_status([&] { m.submit_choice(id, 1, {{"frontier", 0}}); }, &code), 409);
    EXPECT_EQ(code, "round_not_active");
    EXPECT_EQ(m.get_state(id, 0), before);
    EXPECT_EQ(m.export_session(id).find("\"choice\""), std::string::npos);
}

TEST(Session, ChoiceWhileMovingIsRejected) {
    SessionManager m(small_service(40));
    const std::string id = m.create_session({}).at("id");
    const int slot = first_slot(await(m, id, 0, {"awaiting_choice"}));
    m.submit_choice(id, 0, {{"frontier", slot}});
    std::string code;
    EXPECT_EQ(error_status([&] { m.submit_choice(id, 0, {{"frontier", slot}}); }, &code), 409);
    EXPECT_EQ(code, "robot_moving");
}

TEST(Session, ConcurrentSubmitsFirstWins) {
    SessionManager m(small_service(40));
    const std::string id = m.create_session({}).at("id");
    const int slot = first_slot(await(m, id, 0, {"awaiting_choice"}));
    std::atomic<int> accepted{0}, rejected{0};
    std::atomic<bool> go{false};
    std::vector<std::thread> pool;
    for (int t = 0; t < 8; ++t) {
        pool.emplace_back([&] {
            while (!go) std::this_thread::yield();
            try {
                m.submit_choice(id, 0, {{"frontier", slot}});
                ++accepted;
            } catch (const ServiceError& e) {
                if (e.status() == 409) ++rejected;
            }
        });
    }
    go = true;
    for (auto& t : pool) t.join();
    EXPECT_EQ(accepted, 1);
    EXPECT_EQ(rejected, 7);
    const auto log = m.export_session(id);
    std::size_t choices = 0;
    for (std::size_t p = log.find("\"type\":\"choice\""); p != std::string::npos; p = log.find("\"type\":\"choice\"", p + 1))
        ++choices;
    EXPECT_EQ(choices, 1u);
}

TEST(Session, TerminalRoundReportsRewardAndRejectsChoices) {
    SessionManager m(small_service());
    const std::string id = m.create_session({}).at("id");
    const auto last = play_round(m, id, 0);
    EXPECT_TRUE(last.at("terminal").get<bool>());
    EXPECT_EQ(last.at("study_reward").get<double>(),
              study_reward(last.at("iou").get<double>(), last.at("b_r").get<int>()));
    std::string code;
    EXPECT_EQ(error_status([&] { m.submit_choice(id, 0, {{"frontier", 0}}); }, &code), 409);
    EXPECT_EQ(code, "round_terminal");
    const auto d = m.describe(id);
    EXPECT_EQ(d.at("rounds")[0].at("status"), "terminal");
    EXPECT_EQ(d.at("rounds")[0].at("study_reward"), last.at("study_reward"));
    await(m, id, 1, {"awaiting_choice", "terminal"});
}

TEST(Session, EmptySessionExportsHeaderOnly) {
    SessionManager m(small_service());
    const std::string id = m.create_session({{"participant", "nobody"}}).at("id");
    await(m, id, 0, {"awaiting_choice"});
    const auto log = m.export_session(id);
    ASSERT_FALSE(log.empty());
    EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 1);
    const auto header = nlohmann::json::parse(log);
    EXPECT_EQ(header.at("type"), "header");
    EXPECT_EQ(header.at("participant"), "nobody");
    EXPECT_EQ(header.at("rounds").size(), 10u);
}

TEST(Session, ExportReplaysToIdenticalResults) {
    SessionManager m(small_service());
    const std::string id = m.create_session({{"maps", {m.config().maps[0].id()}}}).at("id");
    for (int round = 0; round < 4; ++round) play_round(m, id, round);
    const auto log = m.export_session(id);
    std::istringstream is(log);
    const auto outcomes = replay_session(is);
    ASSERT_EQ(outcomes.size(), 4u);
    for (const auto& o : outcomes) {
        EXPECT_TRUE(o.matches) << "round " << o.round;
        EXPECT_EQ(o.replayed.final_iou, o.recorded.final_iou);
        EXPECT_EQ(o.replayed.study_reward, o.recorded.study_reward);
        EXPECT_EQ(o.recorded.study_reward, study_reward(o.recorded.final_iou, o.recorded.b_r));
    }
    std::istringstream lines(log);
    std::string line;
    int choices = 0;
    while (std::getline(lines, line)) {
        const auto j = nlohmann::json::parse(line);
        if (j.at("type") != "choice") continue;
        ++choices;
        EXPECT_EQ(j.at("snapshot_hash").get<std::string>().size(), 16u);
        EXPECT_GT(j.at("timestamp_ms").get<std::int64_t>(), 0);
    }
    int steps = 0;
    for (const auto& o : outcomes) steps += static_cast<int>(o.recorded.steps.size());
    EXPECT_EQ(choices, steps);
}

TEST(Session, SnapshotHashIgnoresSequence) {
    nlohmann::json a = {{"seq", 1}, {"b_r", 4}};
    nlohmann::json b = {{"seq", 9}, {"b_r", 4}};
    EXPECT_EQ(snapshot_hash(a), snapshot_hash(b));
    b["b_r"] = 3;
    EXPECT_NE(snapshot_hash(a), snapshot_hash(b));
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Subscription, DeliversInOrderAndDrainsAfterClose) {
    Subscription s;
    s.push("a");
    s.push("b");
    s.close();
    EXPECT_FALSE(s.closed());
    EXPECT_EQ(s.next(10ms), "a");
    EXPECT_EQ(s.next(10ms), "b");
    EXPECT_EQ(s.next(10ms), std::nullopt);
    EXPECT_TRUE(s.closed());
}

TEST(Http, EndpointsAndStream) {
    SessionManager m(small_service(5));
    HttpServer server(m);
    const int port = server.start();
    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(30, 0);

    auto maps = cli.Get("/maps");
    ASSERT_TRUE(maps);
    EXPECT_EQ(nlohmann::json::parse(maps->body).at("maps").size(), 3u);

    auto created = cli.Post("/sessions", R"({"participant":"web"})", "application/json");
    ASSERT_TRUE(created);
    EXPECT_EQ(created->status, 201);
    const std::string id = nlohmann::json::parse(created->body).at("id");
    const auto ready = await(m, id, 0, {"awaiting_choice"});

    auto state = cli.Get("/sessions/" + id + "/rounds/0/state");
    ASSERT_TRUE(state);
    EXPECT_EQ(state->status, 200);
    EXPECT_EQ(nlohmann::json::parse(state->body), ready);

    auto bad = cli.Post("/sessions/" + id + "/rounds/0/choice", R"({"frontier":99})", "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    EXPECT_EQ(nlohmann::json::parse(bad->body).at("error"), "invalid_frontier");
    auto garbage = cli.Post("/sessions/" + id + "/rounds/0/choice", "{nope", "application/json");
    ASSERT_TRUE(garbage);
    EXPECT_EQ(garbage->status, 400);
    auto missing = cli.Get("/sessions/zzz");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
    EXPECT_EQ(nlohmann::json::parse(missing->body).at("error"), "unknown_session");

    // Collect streamed snapshots until a fresh choice prompt follows at least one moving update.
    std::vector<nlohmann::json> events;
    std::atomic<bool> subscribed{false};
    std::thread reader([&] {
        httplib::Client sse("127.0.0.1", port);
        sse.set_read_timeout(30, 0);
        std::string buffer;
        sse.Get("/sessions/" + id + "/rounds/0/stream", [&](const char* data, std::size_t n) {
            subscribed = true;
            buffer.append(data, n);
            for (std::size_t end; (end = buffer.find("\n\n")) != std::string::npos;) {
                const std::string frame = buffer.substr(0, end);
                buffer.erase(0, end + 2);
                const auto p = frame.find("data: ");
                if (p == std::string::npos) continue;
                events.push_back(nlohmann::json::parse(frame.substr(p + 6)));
                const auto& e = events.back();
                if (events.size() > 1 && e.at("status") != "moving") return false;
            }
            return true;
        });
    });
    while (!subscribed) std::this_thread::sleep_for(1ms);
    auto ok = cli.Post("/sessions/" + id + "/rounds/0/choice",
                       nlohmann::json{{"frontier", first_slot(ready)}}.dump(), "application/json");
    ASSERT_TRUE(ok);
    EXPECT_EQ(ok->status, 200);
    reader.join();

    ASSERT_GE(events.size(), 4u);
    EXPECT_EQ(events.front().at("status"), "awaiting_choice");
    EXPECT_EQ(events[1].at("status"), "moving");
    const auto& last = events.back();
    EXPECT_TRUE(last.at("status") == "awaiting_choice" || last.at("status") == "terminal");
    for (std::size_t i = 1; i < events.size(); ++i)
        EXPECT_GT(events[i].at("seq").get<std::uint64_t>(), events[i - 1].at("seq").get<std::uint64_t>());
    // The acceptance notice repeats the pre-move state; each later update is one timestep.
    EXPECT_EQ(events[1].at("b_r"), events[0].at("b_r"));
    EXPECT_TRUE(events[1].at("frontiers").empty());
    for (std::size_t i = 2; i + 1 < events.size(); ++i)
        EXPECT_EQ(events[i].at("b_r").get<int>(), events[i - 1].at("b_r").get<int>() - 1);

    auto exported = cli.Get("/sessions/" + id + "/export");
    ASSERT_TRUE(exported);
    EXPECT_EQ(exported->get_header_value("Content-Type"), "application/x-ndjson");
    EXPECT_NE(exported->body.find("\"type\":\"choice\""), std::string::npos);
    server.stop();
}
