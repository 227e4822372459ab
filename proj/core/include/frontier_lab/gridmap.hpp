#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frontier_lab/errors.hpp"

namespace flab {

/// Ternary occupancy state. Numeric encoding: Free=0.0, Unknown=0.5, Occupied=1.0.
enum class CellState : std::uint8_t { Free = 0, Unknown = 1, Occupied = 2 };

constexpr double to_value(CellState s) {
    switch (s) {
        case CellState::Free: return 0.0;
        case CellState::Unknown: return 0.5;
        case CellState::Occupied: return 1.0;
    }
    return 0.5;
}

/// Inverse of to_value; only the three canonical values are accepted.
CellState cell_from_value(double v);

constexpr double kDefaultResolution = 0.10;

struct Pose {
    int x = 0;
    int y = 0;
    friend bool operator==(const Pose&, const Pose&) = default;
};

/// Row-major raster with metric resolution. Shared shape contract for the
/// occupancy, probability and mask grids.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, T fill = T{}, double resolution = kDefaultResolution)
        : width_(width), height_(height), resolution_(resolution) {
        if (width <= 0 || height <= 0) throw ContractViolation("grid dimensions must be positive");
        if (!(resolution > 0.0)) throw ContractViolation("grid resolution must be positive");
        cells_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return resolution_; }
    std::size_t size() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }

    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    bool in_bounds(Pose p) const { return in_bounds(p.x, p.y); }
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    T& operator()(int x, int y) { return cells_[index(x, y)]; }
    const T& operator()(int x, int y) const { return cells_[index(x, y)]; }
    T& operator[](Pose p) { return cells_[index(p.x, p.y)]; }
    const T& operator[](Pose p) const { return cells_[index(p.x, p.y)]; }

    std::span<T> cells() { return cells_; }
    std::span<const T> cells() const { return cells_; }
    std::vector<T>& data() { return cells_; }
    const std::vector<T>& data() const { return cells_; }

    template <typename U>
    bool same_shape(const Grid<U>& other) const {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.resolution_ == b.resolution_ &&
               a.cells_ == b.cells_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    double resolution_ = kDefaultResolution;
    std::vector<T> cells_;
};

using OccupancyGrid = Grid<CellState>;
/// Occupancy probabilities in [0,1].
using ProbabilityGrid = Grid<double>;
/// Boolean raster stored as bytes (0/1).
using BinaryGrid = Grid<std::uint8_t>;

template <typename U, typename T>
void require_same_shape(const Grid<T>& a, const Grid<U>& b, const char* what) {
    if (!a.same_shape(b)) throw ContractViolation(std::string("shape mismatch: ") + what);
}

/// Throws ContractViolation if any value lies outside [0,1] or is not finite.
void validate_probability(const ProbabilityGrid& grid);

/// Numeric encoding of every cell.
ProbabilityGrid to_probability(const OccupancyGrid& grid);

struct GrayThresholds {
    int occupied_below = 64;   // v < 64  -> Occupied
    int free_above = 192;      // v > 192 -> Free
};

/// Reads an 8-bit binary PGM (P5). A sibling `<map>.meta.json` may override
/// the resolution via `resolution_m`.
OccupancyGrid load_map(const std::filesystem::path& path, GrayThresholds thresholds = {});

/// Writes Free=255, Unknown=128, Occupied=0 and a sidecar when the resolution
/// differs from the default.
void save_map(const OccupancyGrid& grid, const std::filesystem::path& path);

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& image, const std::filesystem::path& path);

/// Probabilities stored as v/255 in an 8-bit PGM.
ProbabilityGrid load_probability_map(const std::filesystem::path& path);
void save_probability_map(const ProbabilityGrid& grid, const std::filesystem::path& path);

struct FloorplanParams {
    // Sizes are in cells at 0.1 m. Openings stay wider than the smallest frontier
    // cluster so the frontier detector can see through them.
    int min_room_side = 10;  // interior cells
    int min_door = 6;
    int max_door = 9;
    int min_corridor = 6;
    int max_corridor = 9;
    double corridor_probability = 0.35;
    double extra_door_probability = 0.25;
};

/// Procedural indoor floorplan: outer wall, axis-aligned rooms with 1-cell walls,
/// door gaps of at least six cells, corridors, and a 4-connected free space.
/// Throws LayoutError when the rooms cannot fit.
OccupancyGrid generate_floorplan(std::uint64_t seed, int width, int height, int room_count,
                                 const FloorplanParams& params = {});

/// side x side window whose (i,j) entry is grid(center.x - side/2 + i, center.y - side/2 + j);
/// off-map entries are 0.5.
ProbabilityGrid crop_center(const ProbabilityGrid& grid, Pose center, int side, double pad = 0.5);

/// Number of cells reachable from `seed` through Free cells (4-connectivity).
std::size_t flood_fill_free(const OccupancyGrid& grid, Pose seed);
std::size_t count_state(const OccupancyGrid& grid, CellState state);

}  // namespace flab
