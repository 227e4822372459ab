#pragma once

#include <filesystem>
#include <vector>

#include "frontier_lab/gridmap.hpp"

namespace flab {

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // RGB, row-major
};

/// Observed map (Free white, Unknown gray, Occupied black) with the trajectory in
/// red and the start cell in blue, each cell drawn as scale x scale pixels.
RgbImage render_trajectory(const OccupancyGrid& observed, const std::vector<Pose>& trajectory, int scale = 2);

void write_png(const RgbImage& image, const std::filesystem::path& path);

}  // namespace flab
