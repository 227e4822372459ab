#include "frontier_lab/render.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

namespace flab {

RgbImage render_trajectory(const OccupancyGrid& observed, const std::vector<Pose>& trajectory, int scale) {
    if (scale < 1) throw ContractViolation("render scale must be positive");
    RgbImage img{observed.width() * scale, observed.height() * scale, {}};
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    auto paint = [&](Pose c, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        for (int dy = 0; dy < scale; ++dy) {
            for (int dx = 0; dx < scale; ++dx) {
                const std::size_t i = (static_cast<std::size_t>(c.y * scale + dy) * img.width + c.x * scale + dx) * 3;
                img.pixels[i] = r;
                img.pixels[i + 1] = g;
                img.pixels[i + 2] = b;
            }
        }
    };
    for (int y = 0; y < observed.height(); ++y) {
        for (int x = 0; x < observed.width(); ++x) {
            const std::uint8_t v = observed(x, y) == CellState::Free ? 255 : observed(x, y) == CellState::Unknown ? 160 : 0;
            paint({x, y}, v, v, v);
        }
    }
    for (Pose p : trajectory)
        if (observed.in_bounds(p)) paint(p, 220, 30, 30);
    if (!trajectory.empty() && observed.in_bounds(trajectory.front())) paint(trajectory.front(), 30, 60, 230);
    return img;
}

void write_png(const RgbImage& image, const std::filesystem::path& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!fp) throw MapIoError("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, nullptr);
        throw MapIoError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw MapIoError("libpng failed writing " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y) {
        png_write_row(png, const_cast<png_bytep>(image.pixels.data() + static_cast<std::size_t>(y) * image.width * 3));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace flab
