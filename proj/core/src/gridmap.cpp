#include "frontier_lab/gridmap.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <queue>
#include <sstream>

#include "frontier_lab/random.hpp"

namespace flab {

CellState cell_from_value(double v) {
    if (v == 0.0) return CellState::Free;
    if (v == 0.5) return CellState::Unknown;
    if (v == 1.0) return CellState::Occupied;
    throw ContractViolation("not a canonical cell value: " + std::to_string(v));
}

void validate_probability(const ProbabilityGrid& grid) {
    for (double v : grid.cells()) {
        if (!(v >= 0.0 && v <= 1.0)) throw ContractViolation("probability outside [0,1]");
    }
}

ProbabilityGrid to_probability(const OccupancyGrid& grid) {
    ProbabilityGrid out(grid.width(), grid.height(), 0.5, grid.resolution());
    auto src = grid.cells();
    auto dst = out.cells();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = to_value(src[i]);
    return out;
}

// ---------------------------------------------------------------------------
// PGM IO

namespace {

std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

int parse_header_int(std::istream& in, const std::filesystem::path& path, const char* field) {
    const std::string tok = next_token(in);
    try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw MapIoError(path.string() + ": malformed PGM header field " + field);
    }
}

std::filesystem::path sidecar_path(const std::filesystem::path& map_path) {
    auto p = map_path;
    p.replace_extension(".meta.json");
    return p;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MapIoError("cannot open map file: " + path.string());
    if (next_token(in) != "P5") throw MapIoError(path.string() + ": not a binary PGM (P5)");
    GrayImage img;
    img.width = parse_header_int(in, path, "width");
    img.height = parse_header_int(in, path, "height");
    const int maxval = parse_header_int(in, path, "maxval");
    if (img.width <= 0 || img.height <= 0) throw MapIoError(path.string() + ": zero-area image");
    if (maxval <= 0 || maxval > 255) throw MapIoError(path.string() + ": only 8-bit PGM is supported");
    // next_token consumed exactly one whitespace byte after maxval
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
        throw MapIoError(path.string() + ": truncated pixel data");
    }
    if (maxval != 255) {
        for (auto& p : img.pixels) p = static_cast<std::uint8_t>(std::lround(p * 255.0 / maxval));
    }
    return img;
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MapIoError("cannot write " + path.string());
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw MapIoError("write failed: " + path.string());
}

OccupancyGrid load_map(const std::filesystem::path& path, GrayThresholds thresholds) {
    const GrayImage img = read_pgm(path);
    double resolution = kDefaultResolution;
    const auto meta = sidecar_path(path);
    if (std::filesystem::exists(meta)) {
        std::ifstream in(meta);
        try {
            const auto doc = nlohmann::json::parse(in);
            resolution = doc.value("resolution_m", kDefaultResolution);
        } catch (const nlohmann::json::exception& e) {
            throw MapIoError(meta.string() + ": " + e.what());
        }
        if (!(resolution > 0.0)) throw MapIoError(meta.string() + ": resolution_m must be positive");
    }
    OccupancyGrid grid(img.width, img.height, CellState::Unknown, resolution);
    auto cells = grid.cells();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const int v = img.pixels[i];
        if (v < thresholds.occupied_below)
            cells[i] = CellState::Occupied;
        else if (v > thresholds.free_above)
            cells[i] = CellState::Free;
        else
            cells[i] = CellState::Unknown;
    }
    return grid;
}

void save_map(const OccupancyGrid& grid, const std::filesystem::path& path) {
    GrayImage img{grid.width(), grid.height(), {}};
    img.pixels.reserve(grid.size());
    for (CellState s : grid.cells()) {
        img.pixels.push_back(s == CellState::Free ? 255 : s == CellState::Occupied ? 0 : 128);
    }
    write_pgm(img, path);
    const auto meta = sidecar_path(path);
    if (grid.resolution() != kDefaultResolution) {
        std::ofstream out(meta);
        out << nlohmann::json{{"resolution_m", grid.resolution()}}.dump() << '\n';
    } else if (std::filesystem::exists(meta)) {
        std::filesystem::remove(meta);
    }
}

ProbabilityGrid load_probability_map(const std::filesystem::path& path) {
    const GrayImage img = read_pgm(path);
    ProbabilityGrid grid(img.width, img.height, 0.5);
    auto cells = grid.cells();
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = img.pixels[i] / 255.0;
    return grid;
}

void save_probability_map(const ProbabilityGrid& grid, const std::filesystem::path& path) {
    GrayImage img{grid.width(), grid.height(), {}};
    img.pixels.reserve(grid.size());
    for (double v : grid.cells()) {
        img.pixels.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    }
    write_pgm(img, path);
}

// ---------------------------------------------------------------------------
// Procedural floorplans

namespace {

struct Region {
    int x0, y0, x1, y1;  // inclusive interior bounds
    bool corridor = false;
    int w() const { return x1 - x0 + 1; }
    int h() const { return y1 - y0 + 1; }
    long area() const { return static_cast<long>(w()) * h(); }
};

struct WallSegment {
    bool vertical;  // vertical wall: constant x == fixed, spans y in [from, to]
    int fixed;
    int from, to;
};

class FloorplanBuilder {
public:
    FloorplanBuilder(std::uint64_t seed, int width, int height, int room_count, const FloorplanParams& p)
        : rng_(seed), width_(width), height_(height), room_count_(room_count), p_(p) {}

    OccupancyGrid build() {
        regions_.push_back({1, 1, width_ - 2, height_ - 2});
        int rooms = 1;
        while (rooms < room_count_) {
            const int pick = pick_region();
            if (pick < 0) {
                throw LayoutError("cannot fit " + std::to_string(room_count_) + " rooms in " +
                                  std::to_string(width_) + "x" + std::to_string(height_));
            }
            rooms += split(pick);
        }
        OccupancyGrid grid(width_, height_, CellState::Free);
        for (int x = 0; x < width_; ++x) grid(x, 0) = grid(x, height_ - 1) = CellState::Occupied;
        for (int y = 0; y < height_; ++y) grid(0, y) = grid(width_ - 1, y) = CellState::Occupied;
        for (const auto& w : walls_) {
            for (int t = w.from; t <= w.to; ++t) {
                if (w.vertical)
                    grid(w.fixed, t) = CellState::Occupied;
                else
                    grid(t, w.fixed) = CellState::Occupied;
            }
        }
        for (const auto& w : walls_) place_doors(grid, w);
        return grid;
    }

private:
    bool can_split(const Region& r, int extent, bool corridor) const {
        const int need = corridor ? 2 * p_.min_room_side + p_.min_corridor + 2 : 2 * p_.min_room_side + 1;
        return !r.corridor && extent >= need;
    }

    int pick_region() const {
        int best = -1;
        for (std::size_t i = 0; i < regions_.size(); ++i) {
            const auto& r = regions_[i];
            if (!can_split(r, r.w(), false) && !can_split(r, r.h(), false)) continue;
            if (best < 0 || r.area() > regions_[best].area()) best = static_cast<int>(i);
        }
        return best;
    }

    /// Splits regions_[idx]; returns the number of rooms gained.
    int split(int idx) {
        const Region r = regions_[idx];
        bool vertical;
        const bool v_ok = can_split(r, r.w(), false);
        const bool h_ok = can_split(r, r.h(), false);
        if (v_ok && h_ok) {
            const double bias = static_cast<double>(r.w()) / (r.w() + r.h());
            vertical = rng_.uniform() < bias;
        } else {
            vertical = v_ok;
        }
        const int extent = vertical ? r.w() : r.h();
        const int lo = vertical ? r.x0 : r.y0;
        const int span_from = vertical ? r.y0 : r.x0;
        const int span_to = vertical ? r.y1 : r.x1;

        const bool corridor = can_split(r, extent, true) && rng_.uniform() < p_.corridor_probability;
        if (corridor) {
            const int max_cw = std::min(p_.max_corridor, extent - 2 * p_.min_room_side - 2);
            const int cw = p_.min_corridor + static_cast<int>(rng_.uniform_int(max_cw - p_.min_corridor + 1));
            // first wall at c1, second at c1 + cw + 1
            const int c1_min = lo + p_.min_room_side;
            const int c1_max = lo + extent - 1 - p_.min_room_side - cw - 1;
            const int c1 = c1_min + static_cast<int>(rng_.uniform_int(c1_max - c1_min + 1));
            const int c2 = c1 + cw + 1;
            walls_.push_back({vertical, c1, span_from, span_to});
            walls_.push_back({vertical, c2, span_from, span_to});
            Region a = r, c = r, b = r;
            if (vertical) {
                a.x1 = c1 - 1;
                c.x0 = c1 + 1;
                c.x1 = c2 - 1;
                b.x0 = c2 + 1;
            } else {
                a.y1 = c1 - 1;
                c.y0 = c1 + 1;
                c.y1 = c2 - 1;
                b.y0 = c2 + 1;
            }
            c.corridor = true;
            regions_[idx] = a;
            regions_.push_back(c);
            regions_.push_back(b);
            return 1;
        }
        const int c_min = lo + p_.min_room_side;
        const int c_max = lo + extent - 1 - p_.min_room_side;
        const int c = c_min + static_cast<int>(rng_.uniform_int(c_max - c_min + 1));
        walls_.push_back({vertical, c, span_from, span_to});
        Region a = r, b = r;
        if (vertical) {
            a.x1 = c - 1;
            b.x0 = c + 1;
        } else {
            a.y1 = c - 1;
            b.y0 = c + 1;
        }
        regions_[idx] = a;
        regions_.push_back(b);
        return 1;
    }

    void place_doors(OccupancyGrid& grid, const WallSegment& w) {
        auto side_free = [&](int t) {
            if (w.vertical)
                return grid(w.fixed - 1, t) == CellState::Free && grid(w.fixed + 1, t) == CellState::Free;
            return grid(t, w.fixed - 1) == CellState::Free && grid(t, w.fixed + 1) == CellState::Free;
        };
        std::vector<std::pair<int, int>> runs;  // [start, length)
        for (int t = w.from; t <= w.to;) {
            if (!side_free(t)) {
                ++t;
                continue;
            }
            int s = t;
            while (t <= w.to && side_free(t)) ++t;
            if (t - s >= p_.min_door) runs.emplace_back(s, t - s);
        }
        if (runs.empty()) throw LayoutError("no room for a door on a wall segment");
        auto open = [&](std::pair<int, int> run) {
            const int dw_max = std::min(p_.max_door, run.second);
            const int dw = p_.min_door + static_cast<int>(rng_.uniform_int(dw_max - p_.min_door + 1));
            const int start = run.first + static_cast<int>(rng_.uniform_int(run.second - dw + 1));
            for (int t = start; t < start + dw; ++t) {
                if (w.vertical)
                    grid(w.fixed, t) = CellState::Free;
                else
                    grid(t, w.fixed) = CellState::Free;
            }
        };
        const std::size_t first = rng_.uniform_int(runs.size());
        open(runs[first]);
        if (runs.size() > 1 && rng_.uniform() < p_.extra_door_probability) {
            std::size_t second = rng_.uniform_int(runs.size() - 1);
            if (second >= first) ++second;
            open(runs[second]);
        }
    }

    Rng rng_;
    int width_, height_, room_count_;
    FloorplanParams p_;
    std::vector<Region> regions_;
    std::vector<WallSegment> walls_;
};

}  // namespace

OccupancyGrid generate_floorplan(std::uint64_t seed, int width, int height, int room_count,
                                 const FloorplanParams& params) {
    if (width < 50 || height < 50) throw LayoutError("floorplan dimensions must be at least 50x50");
    if (room_count < 1) throw LayoutError("room_count must be at least 1");
    if (params.min_door < 2 || params.max_door < params.min_door || params.min_room_side < params.max_door) {
        throw LayoutError("inconsistent floorplan parameters");
    }
    OccupancyGrid grid = FloorplanBuilder(seed, width, height, room_count, params).build();

    Pose first{-1, -1};
    for (int y = 0; y < height && first.x < 0; ++y)
        for (int x = 0; x < width; ++x)
            if (grid(x, y) == CellState::Free) {
                first = {x, y};
                break;
            }
    if (first.x < 0 || flood_fill_free(grid, first) != count_state(grid, CellState::Free)) {
        throw LayoutError("generated floorplan is not connected");
    }
    return grid;
}

ProbabilityGrid crop_center(const ProbabilityGrid& grid, Pose center, int side, double pad) {
    if (side <= 0) throw ContractViolation("crop side must be positive");
    ProbabilityGrid out(side, side, pad, grid.resolution());
    const int ox = center.x - side / 2;
    const int oy = center.y - side / 2;
    const int i_begin = std::max(0, -ox), i_end = std::min(side, grid.width() - ox);
    const int j_begin = std::max(0, -oy), j_end = std::min(side, grid.height() - oy);
    for (int j = j_begin; j < j_end; ++j) {
        for (int i = i_begin; i < i_end; ++i) out(i, j) = grid(ox + i, oy + j);
    }
    return out;
}

std::size_t flood_fill_free(const OccupancyGrid& grid, Pose seed) {
    if (!grid.in_bounds(seed) || grid[seed] != CellState::Free) return 0;
    std::vector<std::uint8_t> seen(grid.size(), 0);
    std::queue<Pose> queue;
    queue.push(seed);
    seen[grid.index(seed.x, seed.y)] = 1;
    std::size_t count = 0;
    constexpr int dx[4] = {1, -1, 0, 0};
    constexpr int dy[4] = {0, 0, 1, -1};
    while (!queue.empty()) {
        const Pose p = queue.front();
        queue.pop();
        ++count;
        for (int k = 0; k < 4; ++k) {
            const int nx = p.x + dx[k], ny = p.y + dy[k];
            if (!grid.in_bounds(nx, ny)) continue;
            const auto i = grid.index(nx, ny);
            if (seen[i] || grid(nx, ny) != CellState::Free) continue;
            seen[i] = 1;
            queue.push({nx, ny});
        }
    }
    return count;
}

std::size_t count_state(const OccupancyGrid& grid, CellState state) {
    return static_cast<std::size_t>(std::count(grid.cells().begin(), grid.cells().end(), state));
}

}  // namespace flab
