#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "frontier_lab/episode.hpp"

namespace flab::service {

// ---------------------------------------------------------------------------
// Wire codec. Grids travel as runs of (u32 LE length, u8 value), base64 encoded.

std::string base64_encode(std::string_view bytes);
/// Throws std::invalid_argument on malformed input.
std::string base64_decode(std::string_view text);

std::string rle_encode(std::span<const std::uint8_t> values);
std::vector<std::uint8_t> rle_decode(std::string_view bytes);

/// round(p * 255).
std::uint8_t quantize_probability(double p);
/// round(min(v / 0.25, 1) * 255); 0.25 is the largest possible variance of [0,1] values.
std::uint8_t quantize_variance(double v);

nlohmann::json encode_grid(int width, int height, std::span<const std::uint8_t> values);
/// Returns the values; throws std::invalid_argument if the payload does not match its shape.
std::vector<std::uint8_t> decode_grid(const nlohmann::json& grid, int* width = nullptr, int* height = nullptr);

/// FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

// ---------------------------------------------------------------------------

/// API error carrying an HTTP status and a stable code.
class ServiceError : public std::runtime_error {
public:
    ServiceError(int status, std::string code, const std::string& message)
        : std::runtime_error(message), status_(status), code_(std::move(code)) {}
    int status() const { return status_; }
    const std::string& code() const { return code_; }

private:
    int status_;
    std::string code_;
};

enum class RoundStatus { Pending, AwaitingChoice, Moving, Terminal };
std::string to_string(RoundStatus s);

struct ServiceConfig {
    EpisodeConfig base;
    /// Catalog of study maps; sessions reference them by id.
    std::vector<MapSource> maps;
    MapSource training_map{"", 999, 150, 150, 6};
    int pacing_ms = 30;
    std::uint64_t seed = 0;
    int rounds_per_map = 3;
};

/// Where a round runs. Round 0 is the training round.
struct RoundPlan {
    int index = 0;
    bool training = false;
    MapSource map;
    Pose start;
    EpisodeConfig config;  // fully resolved, including the seed
};

/// Lays out the study: per map, rounds one and two share a start and round three
/// uses a different one.
std::vector<RoundPlan> plan_rounds(const ServiceConfig& cfg, const std::vector<MapSource>& maps, std::uint64_t seed);

/// Snapshot of a round in wire format. `seq` orders snapshots of one round.
nlohmann::json make_snapshot(const Episode& episode, const std::string& session, int round, RoundStatus status,
                             std::uint64_t seq);
/// Hash of a snapshot ignoring its sequence number.
std::string snapshot_hash(const nlohmann::json& snapshot);

/// Queue of server-sent events for one subscriber.
class Subscription {
public:
    void push(std::string event);
    /// Waits up to `timeout` for an event; nullopt on timeout or once closed and drained.
    std::optional<std::string> next(std::chrono::milliseconds timeout);
    void close();
    bool closed() const;

private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::string> events_;
    bool closed_ = false;
};

class Session;

class SessionManager {
public:
    explicit SessionManager(ServiceConfig cfg);
    ~SessionManager();
    SessionManager(const SessionManager&) = delete;
    SessionManager& operator=(const SessionManager&) = delete;

    /// Body: {"participant"?: str, "maps"?: [map id...], "seed"?: int}. Returns the session description.
    nlohmann::json create_session(const nlohmann::json& request);
    nlohmann::json describe(const std::string& id) const;
    nlohmann::json get_state(const std::string& id, int round) const;
    /// Returns an ack with the accepted slot; throws ServiceError on rejection.
    nlohmann::json submit_choice(const std::string& id, int round, const nlohmann::json& body);
    std::shared_ptr<Subscription> subscribe(const std::string& id, int round);
    void unsubscribe(const std::string& id, int round, const std::shared_ptr<Subscription>& sub);
    std::string export_session(const std::string& id) const;
    std::vector<std::string> session_ids() const;
    const ServiceConfig& config() const { return cfg_; }

    /// Blocks until the round reaches `status` or the timeout passes; for tests and tools.
    bool wait_for(const std::string& id, int round, RoundStatus status, std::chrono::milliseconds timeout) const;

private:
    std::shared_ptr<Session> find(const std::string& id) const;

    ServiceConfig cfg_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t next_id_ = 1;
};

struct ReplayOutcome {
    int round = 0;
    EpisodeResult recorded;
    EpisodeResult replayed;
    bool matches = false;
};

/// Re-runs every finished round of an exported session with its recorded choices.
std::vector<ReplayOutcome> replay_session(std::istream& export_jsonl);

}  // namespace flab::service
