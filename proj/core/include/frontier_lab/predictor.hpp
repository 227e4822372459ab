#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "frontier_lab/gridmap.hpp"

namespace flab {

/// Every Unknown cell is predicted 0.5.
struct NullPredictor {};

/// Test double that peeks at the ground truth: box blur of the truth encoding plus
/// deterministic per-cell noise in [-amplitude, amplitude].
struct OracleLeakPredictor {
    int blur_radius = 3;
    std::uint64_t noise_seed = 0;
    double noise_amplitude = 0.1;
};

/// Learning-free inpainting from known cells within a Chebyshev radius.
struct MorphologicalPredictor {
    int radius = 5;
};

/// Out-of-process model. Endpoint is `exec:<shell command>` (stdio) or `tcp://host:port`.
struct ExternalPredictor {
    std::string endpoint;
    int timeout_ms = 30000;
};

using PredictorKind = std::variant<NullPredictor, OracleLeakPredictor, MorphologicalPredictor, ExternalPredictor>;

std::string describe(const PredictorKind& kind);

struct PredictionBundle {
    std::vector<ProbabilityGrid> members;
    ProbabilityGrid mean;
    Grid<double> variance;  // population variance across members
};

/// Builds mean and population variance from equally-shaped members.
PredictionBundle make_bundle(std::vector<ProbabilityGrid> members);

ProbabilityGrid null_predict(const OccupancyGrid& observed);
ProbabilityGrid oracle_leak_predict(const OccupancyGrid& observed, const OccupancyGrid& truth, int blur_radius,
                                    std::uint64_t noise_seed, double noise_amplitude = 0.1);
ProbabilityGrid morphological_inpaint(const OccupancyGrid& observed, int radius);

/// Overwrites every observed-known cell of `prediction` with its exact encoding.
void enforce_pass_through(const OccupancyGrid& observed, ProbabilityGrid& prediction);

// ---------------------------------------------------------------------------
// External predictor wire protocol
//
// frame   := u64 little-endian payload length, payload
// payload := JSON header + '\n' + raw body
// request body: W*H bytes, Free=0 Unknown=128 Occupied=255
// response body: W*H little-endian f32 in [0,1], row-major

namespace protocol {

std::string encode_request(const OccupancyGrid& observed);
OccupancyGrid decode_request(std::string_view payload);
std::string encode_response(const ProbabilityGrid& prediction);
/// Validates the header against the expected shape and every value against [0,1].
ProbabilityGrid decode_response(std::string_view payload, int width, int height);

std::string frame(std::string_view payload);

/// Blocking frame IO on a file descriptor. read_frame returns false on clean EOF
/// before any byte; throws PredictorError on timeout or truncated input.
bool read_frame(int fd, std::string& payload, int timeout_ms = -1);
void write_frame(int fd, std::string_view payload, int timeout_ms = -1);

}  // namespace protocol

/// One connection to an external predictor. At most one request in flight.
class ExternalPredictorClient {
public:
    explicit ExternalPredictorClient(ExternalPredictor spec);
    ~ExternalPredictorClient();
    ExternalPredictorClient(const ExternalPredictorClient&) = delete;
    ExternalPredictorClient& operator=(const ExternalPredictorClient&) = delete;

    ProbabilityGrid predict(const OccupancyGrid& observed);

private:
    void connect();
    void close();

    ExternalPredictor spec_;
    int read_fd_ = -1;
    int write_fd_ = -1;
    int child_pid_ = -1;
};

/// Owns the ensemble members (and any external connections) for one episode.
class PredictorEnsemble {
public:
    explicit PredictorEnsemble(std::vector<PredictorKind> members);
    ~PredictorEnsemble();
    PredictorEnsemble(PredictorEnsemble&&) noexcept;
    PredictorEnsemble& operator=(PredictorEnsemble&&) noexcept;

    /// `truth` is required only by OracleLeak members.
    PredictionBundle predict(const OccupancyGrid& observed, const OccupancyGrid* truth = nullptr);

    std::span<const PredictorKind> members() const { return members_; }

private:
    std::vector<PredictorKind> members_;
    std::vector<std::unique_ptr<ExternalPredictorClient>> clients_;
};

PredictionBundle predict(const OccupancyGrid& observed, std::span<const PredictorKind> ensemble,
                         const OccupancyGrid* truth = nullptr);

/// Three oracle-leak members with seeds 1..3.
std::vector<PredictorKind> default_ensemble(int blur_radius = 3, double noise_amplitude = 0.1);

}  // namespace flab
