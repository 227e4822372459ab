#include "frontier_lab/rl/observation.hpp"

#include <algorithm>
#include <cmath>

namespace flab::rl {

void PreprocessSpec::validate() const {
    if (crop < 1 || resize < 1 || pool < 1) throw ConfigError("preprocess sizes must be positive");
    if (resize % pool != 0) throw ConfigError("resize must be a multiple of the pool size");
    if (channels < 1 || channels > 3) throw ConfigError("encoder channels must be 1, 2 or 3");
}

void to_json(nlohmann::json& j, const PreprocessSpec& s) {
    j = {{"crop", s.crop}, {"resize", s.resize}, {"pool", s.pool}, {"channels", s.channels}};
}

void from_json(const nlohmann::json& j, PreprocessSpec& s) {
    s.crop = j.value("crop", s.crop);
    s.resize = j.value("resize", s.resize);
    s.pool = j.value("pool", s.pool);
    s.channels = j.value("channels", s.channels);
    s.validate();
}

namespace {

struct Tap {
    int i0, i1;
    double w1;
};

// Half-pixel-center bilinear taps, negative source coordinates clamped to 0.
std::vector<Tap> bilinear_taps(int in, int out) {
    std::vector<Tap> taps(out);
    const double scale = static_cast<double>(in) / out;
    for (int o = 0; o < out; ++o) {
        const double src = std::max((o + 0.5) * scale - 0.5, 0.0);
        const int i0 = std::min(static_cast<int>(src), in - 1);
        taps[o] = {i0, std::min(i0 + 1, in - 1), src - i0};
    }
    return taps;
}

}  // namespace

std::vector<float> preprocess_map(const ProbabilityGrid& grid, Pose robot, const PreprocessSpec& spec) {
    spec.validate();
    const int ox = robot.x - spec.crop / 2, oy = robot.y - spec.crop / 2;
    const auto taps = bilinear_taps(spec.crop, spec.resize);
    auto sample = [&](int cx, int cy) {
        const int x = ox + cx, y = oy + cy;
        return grid.in_bounds(x, y) ? grid(x, y) : 0.5;
    };
    // Resized rows are produced on demand; only `pool` of them are live at once.
    std::vector<double> row(spec.resize);
    const int side = spec.output_side();
    std::vector<float> out(static_cast<std::size_t>(side) * side, 0.0f);
    for (int py = 0; py < side; ++py) {
        for (int k = 0; k < spec.pool; ++k) {
            const Tap& ty = taps[py * spec.pool + k];
            for (int u = 0; u < spec.resize; ++u) {
                const Tap& tx = taps[u];
                const double top = sample(tx.i0, ty.i0) * (1.0 - tx.w1) + sample(tx.i1, ty.i0) * tx.w1;
                const double bottom = sample(tx.i0, ty.i1) * (1.0 - tx.w1) + sample(tx.i1, ty.i1) * tx.w1;
                row[u] = top * (1.0 - ty.w1) + bottom * ty.w1;
            }
            for (int px = 0; px < side; ++px) {
                double m = row[px * spec.pool];
                for (int j = 1; j < spec.pool; ++j) m = std::max(m, row[px * spec.pool + j]);
                float& dst = out[static_cast<std::size_t>(py) * side + px];
                dst = k == 0 ? static_cast<float>(m) : std::max(dst, static_cast<float>(m));
            }
        }
    }
    return out;
}

std::vector<float> preprocess_map_reference(const ProbabilityGrid& grid, Pose robot, const PreprocessSpec& spec) {
    spec.validate();
    const ProbabilityGrid crop = crop_center(grid, robot, spec.crop, 0.5);
    const auto taps = bilinear_taps(spec.crop, spec.resize);
    std::vector<double> resized(static_cast<std::size_t>(spec.resize) * spec.resize);
    for (int v = 0; v < spec.resize; ++v) {
        for (int u = 0; u < spec.resize; ++u) {
            const Tap &tx = taps[u], &ty = taps[v];
            resized[static_cast<std::size_t>(v) * spec.resize + u] =
                (crop(tx.i0, ty.i0) * (1.0 - tx.w1) + crop(tx.i1, ty.i0) * tx.w1) * (1.0 - ty.w1) +
                (crop(tx.i0, ty.i1) * (1.0 - tx.w1) + crop(tx.i1, ty.i1) * tx.w1) * ty.w1;
        }
    }
    const int side = spec.output_side();
    std::vector<float> out(static_cast<std::size_t>(side) * side);
    for (int py = 0; py < side; ++py) {
        for (int px = 0; px < side; ++px) {
            double m = -1.0;
            for (int a = 0; a < spec.pool; ++a)
                for (int b = 0; b < spec.pool; ++b)
                    m = std::max(m, resized[static_cast<std::size_t>(py * spec.pool + a) * spec.resize + px * spec.pool + b]);
            out[static_cast<std::size_t>(py) * side + px] = static_cast<float>(m);
        }
    }
    return out;
}

std::vector<float> preprocess_bundle(const PredictionBundle& bundle, const OccupancyGrid& observed, Pose robot,
                                     const PreprocessSpec& spec) {
    std::vector<float> image = preprocess_map(bundle.mean, robot, spec);
    if (spec.channels >= 2) {
        const auto obs = preprocess_map(to_probability(observed), robot, spec);
        image.insert(image.end(), obs.begin(), obs.end());
    }
    if (spec.channels >= 3) {
        // Population variance of values in [0,1] is at most 0.25.
        ProbabilityGrid scaled(bundle.variance.width(), bundle.variance.height(), 0.0, bundle.variance.resolution());
        for (std::size_t i = 0; i < scaled.size(); ++i) scaled.data()[i] = std::min(bundle.variance.data()[i] * 4.0, 1.0);
        const auto var = preprocess_map(scaled, robot, spec);
        image.insert(image.end(), var.begin(), var.end());
    }
    return image;
}

int Observation::valid_count() const { return static_cast<int>(std::count(valid.begin(), valid.end(), 1)); }

Observation make_observation(const PredictionBundle& bundle, const OccupancyGrid& observed, Pose robot,
                             const PlanningView& view, const PreprocessSpec& spec) {
    Observation obs;
    obs.image = preprocess_bundle(bundle, observed, robot, spec);
    obs.features = view.features.flatten();
    const auto mask = view.actions.valid_mask();
    obs.valid.assign(mask.begin(), mask.end());
    return obs;
}

std::vector<float> assemble_observation(std::span<const float> latent, std::span<const float> features) {
    std::vector<float> out(latent.begin(), latent.end());
    out.insert(out.end(), features.begin(), features.end());
    return out;
}

}  // namespace flab::rl
