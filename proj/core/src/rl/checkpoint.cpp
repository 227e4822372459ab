#include "frontier_lab/rl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace flab::rl {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

template <typename U>
void put(std::ostream& os, U v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename U>
U get(std::istream& is) {
    U v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw ConfigError("checkpoint truncated");
    return v;
}

}  // namespace

void save_checkpoint(SacAgent<float>& agent, const std::filesystem::path& path, const nlohmann::json& extra) {
    const auto tensors = agent.named_tensors();
    nlohmann::json list = nlohmann::json::array();
    for (const auto& [name, p] : tensors) list.push_back({{"name", name}, {"shape", {p->value.rows(), p->value.cols()}}});
    const nlohmann::json manifest = {{"code_version", kCodeVersion},
                                     {"network", agent.shape()},
                                     {"sac", agent.config()},
                                     {"tensors", list},
                                     {"extra", extra.is_null() ? nlohmann::json::object() : extra}};
    const std::string text = manifest.dump();

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ConfigError("cannot write checkpoint " + tmp);
        os.write(kCheckpointMagic, sizeof kCheckpointMagic);
        put<std::uint32_t>(os, kCheckpointVersion);
        put<std::uint64_t>(os, text.size());
        os.write(text.data(), static_cast<std::streamsize>(text.size()));
        for (const auto& [name, p] : tensors) {
            os.write(reinterpret_cast<const char*>(p->value.data()),
                     static_cast<std::streamsize>(p->value.size() * sizeof(float)));
        }
        if (!os) throw ConfigError("failed writing checkpoint " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open checkpoint " + path.string());
    char magic[8];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
        throw ConfigError(path.string() + " is not a checkpoint");
    }
    const auto version = get<std::uint32_t>(is);
    if (version != kCheckpointVersion) throw ConfigError("unsupported checkpoint version " + std::to_string(version));
    const auto len = get<std::uint64_t>(is);
    if (len > (1u << 26)) throw ConfigError("checkpoint manifest too large");
    std::string text(len, '\0');
    if (!is.read(text.data(), static_cast<std::streamsize>(len))) throw ConfigError("checkpoint truncated");

    LoadedCheckpoint out;
    try {
        out.manifest = nlohmann::json::parse(text);
        out.agent = std::make_unique<SacAgent<float>>(out.manifest.at("network").get<NetworkShape>(),
                                                      out.manifest.at("sac").get<SacConfig>(), 0);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad checkpoint manifest: ") + e.what());
    }
    auto tensors = out.agent->named_tensors();
    const auto& list = out.manifest.at("tensors");
    if (list.size() != tensors.size()) throw ConfigError("checkpoint tensor count mismatch");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        auto& [name, p] = tensors[i];
        const auto shape = list[i].at("shape").get<std::vector<long>>();
        if (list[i].at("name").get<std::string>() != name || shape.size() != 2 || shape[0] != p->value.rows() ||
            shape[1] != p->value.cols()) {
            throw ConfigError("checkpoint tensor " + name + " does not match the network");
        }
        if (!is.read(reinterpret_cast<char*>(p->value.data()),
                     static_cast<std::streamsize>(p->value.size() * sizeof(float)))) {
            throw ConfigError("checkpoint truncated in tensor " + name);
        }
    }
    return out;
}

}  // namespace flab::rl
