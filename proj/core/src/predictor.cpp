#include "frontier_lab/predictor.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <nlohmann/json.hpp>

#include "frontier_lab/random.hpp"

namespace flab {

std::string describe(const PredictorKind& kind) {
    return std::visit(
        [](const auto& k) -> std::string {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, NullPredictor>) {
                return "null";
            } else if constexpr (std::is_same_v<K, OracleLeakPredictor>) {
                return "oracle_leak(blur=" + std::to_string(k.blur_radius) + ",seed=" + std::to_string(k.noise_seed) +
                       ")";
            } else if constexpr (std::is_same_v<K, MorphologicalPredictor>) {
                return "morphological(radius=" + std::to_string(k.radius) + ")";
            } else {
                return "external(" + k.endpoint + ")";
            }
        },
        kind);
}

PredictionBundle make_bundle(std::vector<ProbabilityGrid> members) {
    if (members.empty()) throw ContractViolation("prediction ensemble must not be empty");
    const auto& first = members.front();
    for (const auto& m : members) require_same_shape(first, m, "ensemble members");
    PredictionBundle bundle;
    bundle.mean = ProbabilityGrid(first.width(), first.height(), 0.0, first.resolution());
    bundle.variance = Grid<double>(first.width(), first.height(), 0.0, first.resolution());
    const double k = static_cast<double>(members.size());
    auto mean = bundle.mean.cells();
    auto var = bundle.variance.cells();
    for (std::size_t i = 0; i < mean.size(); ++i) {
        double sum = 0.0;
        for (const auto& m : members) sum += m.cells()[i];
        const double mu = sum / k;
        double sq = 0.0;
        for (const auto& m : members) {
            const double d = m.cells()[i] - mu;
            sq += d * d;
        }
        mean[i] = mu;
        var[i] = sq / k;
    }
    bundle.members = std::move(members);
    return bundle;
}

void enforce_pass_through(const OccupancyGrid& observed, ProbabilityGrid& prediction) {
    require_same_shape(observed, prediction, "pass-through");
    auto obs = observed.cells();
    auto out = prediction.cells();
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (obs[i] != CellState::Unknown) out[i] = to_value(obs[i]);
    }
}

ProbabilityGrid null_predict(const OccupancyGrid& observed) { return to_probability(observed); }

ProbabilityGrid oracle_leak_predict(const OccupancyGrid& observed, const OccupancyGrid& truth, int blur_radius,
                                    std::uint64_t noise_seed, double noise_amplitude) {
    require_same_shape(observed, truth, "oracle-leak observed/truth");
    if (blur_radius < 0) throw ContractViolation("blur_radius must be non-negative");
    const int w = truth.width(), h = truth.height();
    // Summed-area table of the truth encoding, (w+1) x (h+1).
    std::vector<double> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    auto at = [&](int x, int y) -> double& { return sat[static_cast<std::size_t>(y) * (w + 1) + x]; };
    for (int y = 0; y < h; ++y) {
        double row = 0.0;
        for (int x = 0; x < w; ++x) {
            row += to_value(truth(x, y));
            at(x + 1, y + 1) = at(x + 1, y) + row;
        }
    }
    ProbabilityGrid out = to_probability(observed);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (observed(x, y) != CellState::Unknown) continue;
            const int x0 = std::max(0, x - blur_radius), x1 = std::min(w, x + blur_radius + 1);
            const int y0 = std::max(0, y - blur_radius), y1 = std::min(h, y + blur_radius + 1);
            const double sum = at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
            const double blurred = sum / ((x1 - x0) * (y1 - y0));
            const std::uint64_t bits = hash_combine(noise_seed, truth.index(x, y));
            const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
            const double noise = noise_amplitude * (2.0 * u - 1.0);
            out(x, y) = std::clamp(blurred + noise, 0.0, 1.0);
        }
    }
    return out;
}

ProbabilityGrid morphological_inpaint(const OccupancyGrid& observed, int radius) {
    if (radius < 1) throw ContractViolation("inpaint radius must be at least 1");
    ProbabilityGrid out = to_probability(observed);
    const int w = observed.width(), h = observed.height();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (observed(x, y) != CellState::Unknown) continue;
            double weight = 0.0, acc = 0.0;
            for (int ny = std::max(0, y - radius); ny <= std::min(h - 1, y + radius); ++ny) {
                for (int nx = std::max(0, x - radius); nx <= std::min(w - 1, x + radius); ++nx) {
                    const CellState s = observed(nx, ny);
                    if (s == CellState::Unknown) continue;
                    const double wgt = 1.0 / std::hypot(nx - x, ny - y);
                    weight += wgt;
                    acc += wgt * to_value(s);
                }
            }
            out(x, y) = weight > 0.0 ? acc / weight : 0.5;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Wire protocol

namespace protocol {

namespace {

std::pair<nlohmann::json, std::string_view> split_payload(std::string_view payload) {
    const auto nl = payload.find('\n');
    if (nl == std::string_view::npos) throw PredictorError("protocol: missing header terminator");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(payload.substr(0, nl));
    } catch (const nlohmann::json::exception& e) {
        throw PredictorError(std::string("protocol: bad header: ") + e.what());
    }
    if (!header.is_object() || !header.contains("width") || !header.contains("height") || !header.contains("dtype")) {
        throw PredictorError("protocol: header needs width, height, dtype");
    }
    return {header, payload.substr(nl + 1)};
}

std::string make_header(int w, int h, const char* dtype) {
    return nlohmann::json{{"width", w}, {"height", h}, {"dtype", dtype}}.dump() + "\n";
}

int wait_fd(int fd, short events, int timeout_ms) {
    pollfd p{fd, events, 0};
    int rc;
    do {
        rc = ::poll(&p, 1, timeout_ms);
    } while (rc < 0 && errno == EINTR);
    return rc;
}

}  // namespace

std::string encode_request(const OccupancyGrid& observed) {
    std::string out = make_header(observed.width(), observed.height(), "u8");
    out.reserve(out.size() + observed.size());
    for (CellState s : observed.cells()) {
        out.push_back(static_cast<char>(s == CellState::Free ? 0 : s == CellState::Unknown ? 128 : 255));
    }
    return out;
}

OccupancyGrid decode_request(std::string_view payload) {
    auto [header, body] = split_payload(payload);
    if (header["dtype"] != "u8") throw PredictorError("protocol: request dtype must be u8");
    const int w = header["width"].get<int>(), h = header["height"].get<int>();
    if (w <= 0 || h <= 0 || body.size() != static_cast<std::size_t>(w) * h) {
        throw PredictorError("protocol: request body size mismatch");
    }
    OccupancyGrid grid(w, h, CellState::Unknown);
    auto cells = grid.cells();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto v = static_cast<std::uint8_t>(body[i]);
        if (v == 0)
            cells[i] = CellState::Free;
        else if (v == 255)
            cells[i] = CellState::Occupied;
        else if (v == 128)
            cells[i] = CellState::Unknown;
        else
            throw PredictorError("protocol: request byte not in {0,128,255}");
    }
    return grid;
}

std::string encode_response(const ProbabilityGrid& prediction) {
    std::string out = make_header(prediction.width(), prediction.height(), "f32");
    const std::size_t head = out.size();
    out.resize(head + prediction.size() * 4);
    char* dst = out.data() + head;
    for (double v : prediction.cells()) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        for (int b = 0; b < 4; ++b) *dst++ = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
    return out;
}

ProbabilityGrid decode_response(std::string_view payload, int width, int height) {
    auto [header, body] = split_payload(payload);
    if (header["dtype"] != "f32") throw PredictorError("protocol: response dtype must be f32");
    if (header["width"].get<int>() != width || header["height"].get<int>() != height) {
        throw PredictorError("protocol: response shape does not match request");
    }
    if (body.size() != static_cast<std::size_t>(width) * height * 4) {
        throw PredictorError("protocol: response body size mismatch");
    }
    ProbabilityGrid grid(width, height, 0.5);
    auto cells = grid.cells();
    const auto* src = reinterpret_cast<const unsigned char*>(body.data());
    for (std::size_t i = 0; i < cells.size(); ++i, src += 4) {
        const std::uint32_t bits = src[0] | (src[1] << 8) | (src[2] << 16) | (static_cast<std::uint32_t>(src[3]) << 24);
        const float v = std::bit_cast<float>(bits);
        if (!(v >= 0.0f && v <= 1.0f)) throw PredictorError("protocol: response value outside [0,1]");
        cells[i] = v;
    }
    return grid;
}

std::string frame(std::string_view payload) {
    std::string out(8, '\0');
    const std::uint64_t n = payload.size();
    for (int b = 0; b < 8; ++b) out[b] = static_cast<char>((n >> (8 * b)) & 0xff);
    out.append(payload);
    return out;
}

namespace {

/// Returns bytes read; 0 only on EOF.
std::size_t read_exact(int fd, char* dst, std::size_t n, int timeout_ms) {
    std::size_t got = 0;
    while (got < n) {
        if (timeout_ms >= 0) {
            const int rc = wait_fd(fd, POLLIN, timeout_ms);
            if (rc == 0) throw PredictorError("protocol: read timed out");
            if (rc < 0) throw PredictorError(std::string("protocol: poll failed: ") + std::strerror(errno));
        }
        const ssize_t r = ::read(fd, dst + got, n - got);
        if (r < 0) {
            if (errno == EINTR) continue;
            throw PredictorError(std::string("protocol: read failed: ") + std::strerror(errno));
        }
        if (r == 0) return got;
        got += static_cast<std::size_t>(r);
    }
    return got;
}

}  // namespace

bool read_frame(int fd, std::string& payload, int timeout_ms) {
    unsigned char len[8];
    const std::size_t got = read_exact(fd, reinterpret_cast<char*>(len), 8, timeout_ms);
    if (got == 0) return false;
    if (got != 8) throw PredictorError("protocol: truncated length prefix");
    std::uint64_t n = 0;
    for (int b = 7; b >= 0; --b) n = (n << 8) | len[b];
    if (n > (std::uint64_t{1} << 34)) throw PredictorError("protocol: frame too large");
    payload.resize(n);
    if (read_exact(fd, payload.data(), n, timeout_ms) != n) throw PredictorError("protocol: truncated payload");
    return true;
}

void write_frame(int fd, std::string_view payload, int timeout_ms) {
    const std::string data = frame(payload);
    std::size_t sent = 0;
    while (sent < data.size()) {
        if (timeout_ms >= 0) {
            const int rc = wait_fd(fd, POLLOUT, timeout_ms);
            if (rc == 0) throw PredictorError("protocol: write timed out");
            if (rc < 0) throw PredictorError(std::string("protocol: poll failed: ") + std::strerror(errno));
        }
        const ssize_t w = ::write(fd, data.data() + sent, data.size() - sent);
        if (w < 0) {
            if (errno == EINTR) continue;
            throw PredictorError(std::string("protocol: write failed: ") + std::strerror(errno));
        }
        sent += static_cast<std::size_t>(w);
    }
}

}  // namespace protocol

// ---------------------------------------------------------------------------
// External client

ExternalPredictorClient::ExternalPredictorClient(ExternalPredictor spec) : spec_(std::move(spec)) {
    // A predictor process that dies must surface as an error, not kill us.
    ::signal(SIGPIPE, SIG_IGN);
}

ExternalPredictorClient::~ExternalPredictorClient() { close(); }

void ExternalPredictorClient::close() {
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    read_fd_ = write_fd_ = -1;
    if (child_pid_ > 0) {
        int status = 0;
        if (::waitpid(child_pid_, &status, WNOHANG) == 0) {
            ::kill(child_pid_, SIGTERM);
            ::waitpid(child_pid_, &status, 0);
        }
        child_pid_ = -1;
    }
}

void ExternalPredictorClient::connect() {
    const std::string& ep = spec_.endpoint;
    if (ep.rfind("exec:", 0) == 0) {
        const std::string command = ep.substr(5);
        int to_child[2], from_child[2];
        if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) throw PredictorError("pipe() failed");
        const pid_t pid = ::fork();
        if (pid < 0) throw PredictorError("fork() failed");
        if (pid == 0) {
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            ::close(to_child[0]);
            ::close(to_child[1]);
            ::close(from_child[0]);
            ::close(from_child[1]);
            ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::close(to_child[0]);
        ::close(from_child[1]);
        write_fd_ = to_child[1];
        read_fd_ = from_child[0];
        child_pid_ = pid;
        return;
    }
    if (ep.rfind("tcp://", 0) == 0) {
        const std::string rest = ep.substr(6);
        const auto colon = rest.rfind(':');
        if (colon == std::string::npos) throw PredictorError("tcp endpoint needs host:port");
        const std::string host = rest.substr(0, colon), port = rest.substr(colon + 1);
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || !res) {
            throw PredictorError("cannot resolve " + ep);
        }
        int fd = -1;
        for (addrinfo* a = res; a; a = a->ai_next) {
            fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
            if (fd < 0) continue;
            if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
            ::close(fd);
            fd = -1;
        }
        ::freeaddrinfo(res);
        if (fd < 0) throw PredictorError("cannot connect to " + ep);
        read_fd_ = write_fd_ = fd;
        return;
    }
    throw PredictorError("unsupported predictor endpoint: " + ep);
}

ProbabilityGrid ExternalPredictorClient::predict(const OccupancyGrid& observed) {
    if (read_fd_ < 0) connect();
    try {
        protocol::write_frame(write_fd_, protocol::encode_request(observed), spec_.timeout_ms);
        std::string payload;
        if (!protocol::read_frame(read_fd_, payload, spec_.timeout_ms)) {
            throw PredictorError("external predictor closed the connection");
        }
        const auto decoded = protocol::decode_response(payload, observed.width(), observed.height());
        ProbabilityGrid out(observed.width(), observed.height(), 0.5, observed.resolution());
        std::copy(decoded.cells().begin(), decoded.cells().end(), out.cells().begin());
        return out;
    } catch (...) {
        close();
        throw;
    }
}

// ---------------------------------------------------------------------------
// Ensemble

PredictorEnsemble::PredictorEnsemble(std::vector<PredictorKind> members) : members_(std::move(members)) {
    if (members_.empty()) throw ContractViolation("prediction ensemble must not be empty");
    clients_.resize(members_.size());
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (const auto* ext = std::get_if<ExternalPredictor>(&members_[i])) {
            clients_[i] = std::make_unique<ExternalPredictorClient>(*ext);
        }
    }
}

PredictorEnsemble::~PredictorEnsemble() = default;
PredictorEnsemble::PredictorEnsemble(PredictorEnsemble&&) noexcept = default;
PredictorEnsemble& PredictorEnsemble::operator=(PredictorEnsemble&&) noexcept = default;

PredictionBundle PredictorEnsemble::predict(const OccupancyGrid& observed, const OccupancyGrid* truth) {
    std::vector<ProbabilityGrid> outputs;
    outputs.reserve(members_.size());
    for (std::size_t i = 0; i < members_.size(); ++i) {
        ProbabilityGrid p = std::visit(
            [&](const auto& k) -> ProbabilityGrid {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, NullPredictor>) {
                    return null_predict(observed);
                } else if constexpr (std::is_same_v<K, OracleLeakPredictor>) {
                    if (!truth) throw PredictorError("oracle-leak predictor requires the truth map");
                    return oracle_leak_predict(observed, *truth, k.blur_radius, k.noise_seed, k.noise_amplitude);
                } else if constexpr (std::is_same_v<K, MorphologicalPredictor>) {
                    return morphological_inpaint(observed, k.radius);
                } else {
                    try {
                        return clients_[i]->predict(observed);
                    } catch (const PredictorError& e) {
                        throw PredictorError("ensemble member " + std::to_string(i) + " (" + k.endpoint +
                                             "): " + e.what());
                    }
                }
            },
            members_[i]);
        enforce_pass_through(observed, p);
        outputs.push_back(std::move(p));
    }
    return make_bundle(std::move(outputs));
}

PredictionBundle predict(const OccupancyGrid& observed, std::span<const PredictorKind> ensemble,
                         const OccupancyGrid* truth) {
    PredictorEnsemble e(std::vector<PredictorKind>(ensemble.begin(), ensemble.end()));
    return e.predict(observed, truth);
}

std::vector<PredictorKind> default_ensemble(int blur_radius, double noise_amplitude) {
    std::vector<PredictorKind> out;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        out.emplace_back(OracleLeakPredictor{blur_radius, seed, noise_amplitude});
    }
    return out;
}

}  // namespace flab
