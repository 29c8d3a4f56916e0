#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "wob/nn/autoencoder.hpp"

namespace wob::nn {

inline constexpr char kCheckpointMagic[8] = {'W', 'O', 'B', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

/// Layout: 8-byte magic, uint64 LE header length, JSON header, then every
/// parameter as LE float32 in layer order (weight then bias).
inline void save_checkpoint(const std::filesystem::path& path, ConvStack<float>& model, nlohmann::json extra = nlohmann::json::object()) {
    nlohmann::json header = {
        {"format", "wob-autoencoder"},
        {"layers", table_to_json(model.table())},
        {"encoder_layers", model.encoder_layers()},
        {"param_count", model.param_count()},
        {"leaky_slope", model.options().leaky_slope},
        {"clamp_output", model.options().clamp_output},
    };
    header.update(extra);
    const std::string h = header.dump();
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(kCheckpointMagic, 8);
        const std::uint64_t len = h.size();
        out.write(reinterpret_cast<const char*>(&len), 8);
        out.write(h.data(), std::streamsize(h.size()));
        for (const auto& p : model.params()) out.write(reinterpret_cast<const char*>(p.data()), std::streamsize(p.size() * 4));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

struct LoadedCheckpoint {
    ConvStack<float> model;
    nlohmann::json header;
};

inline LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    char magic[8];
    std::uint64_t len = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&len), 8);
    if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0) throw DataIntegrityError(path.string() + ": not a checkpoint");
    if (len > (1u << 24)) throw DataIntegrityError(path.string() + ": implausible header length");
    std::string h(len, '\0');
    in.read(h.data(), std::streamsize(len));
    if (!in) throw DataIntegrityError(path.string() + ": truncated header");
    nlohmann::json header;
    ModelOptions opt;
    std::vector<LayerSpec> table;
    std::size_t enc = 0, count = 0;
    try {
        header = nlohmann::json::parse(h);
        table = table_from_json(header.at("layers"));
        enc = header.at("encoder_layers").get<std::size_t>();
        count = header.at("param_count").get<std::size_t>();
        opt.leaky_slope = header.at("leaky_slope").get<double>();
        opt.clamp_output = header.at("clamp_output").get<bool>();
    } catch (const std::exception& e) {
        throw DataIntegrityError(path.string() + ": bad header: " + e.what());
    }
    ConvStack<float> model(table, opt, enc);
    if (model.param_count() != count) throw DataIntegrityError(path.string() + ": parameter count does not match the layer table");
    for (auto& p : model.params()) {
        in.read(reinterpret_cast<char*>(p.data()), std::streamsize(p.size() * 4));
        if (!in) throw DataIntegrityError(path.string() + ": truncated parameter blob");
    }
    if (in.peek() != std::char_traits<char>::eof()) throw DataIntegrityError(path.string() + ": trailing bytes after parameters");
    return {std::move(model), std::move(header)};
}

}  // namespace wob::nn
