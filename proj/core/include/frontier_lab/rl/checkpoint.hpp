#pragma once

#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>

#include "frontier_lab/rl/sac.hpp"

namespace flab::rl {

inline constexpr char kCheckpointMagic[8] = {'F', 'L', 'A', 'B', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr const char* kCodeVersion = "frontier_lab 0.1.0";

// Layout: magic[8], u32 version, u64 manifest length, manifest JSON, then each
// tensor listed in the manifest as little-endian f32 in row-major order.
//
// The manifest carries the network shape, SAC config, tensor names and shapes,
// and a free-form "extra" object (preprocessing, action space, ...).

void save_checkpoint(SacAgent<float>& agent, const std::filesystem::path& path, const nlohmann::json& extra = {});

struct LoadedCheckpoint {
    std::unique_ptr<SacAgent<float>> agent;
    nlohmann::json manifest;
};

/// Throws ConfigError on a malformed or mismatching file.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace flab::rl
