#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wob/agent/agent.hpp"
#include "wob/bugs/controller.hpp"
#include "wob/core/error.hpp"
#include "wob/core/image.hpp"

namespace wob {

inline constexpr int kEpisodeSchemaVersion = 1;
inline constexpr int kFrameWidth = 84;
inline constexpr int kFrameHeight = 84;

enum class Partition { Normal, Bugged, Test };

inline std::string to_string(Partition p) {
    switch (p) {
        case Partition::Normal: return "normal";
        case Partition::Bugged: return "bugged";
        default: return "test";
    }
}

inline Partition parse_partition(const std::string& s) {
    if (s == "normal") return Partition::Normal;
    if (s == "bugged") return Partition::Bugged;
    if (s == "test") return Partition::Test;
    throw DataIntegrityError("unknown partition '" + s + "'");
}

/// Half-open frame interval [begin, end).
struct Window {
    std::uint64_t begin = 0;
    std::uint64_t end = 0;
    bool contains(std::uint64_t t) const { return t >= begin && t < end; }
    friend bool operator==(const Window&, const Window&) = default;
};

struct EnabledBug {
    BugKind kind = BugKind::BlackScreen;
    std::string target;
    BugParams params;
    std::vector<Window> windows;  // frames where the bug was switched on
    friend bool operator==(const EnabledBug&, const EnabledBug&) = default;
};

struct EpisodeMeta {
    int schema_version = kEpisodeSchemaVersion;
    std::uint64_t seed = 0;
    std::string scene_hash;
    Partition partition = Partition::Normal;
    std::vector<EnabledBug> enabled_bugs;
    std::uint64_t frame_count = 0;
    int width = kFrameWidth;
    int height = kFrameHeight;
    bool has_masks = false;
    nlohmann::json agent = nlohmann::json::object();

    friend bool operator==(const EpisodeMeta&, const EpisodeMeta&) = default;
};

struct Episode {
    std::vector<Frame> frames;
    std::vector<MaskFrame> masks;  // empty when not stored
    std::vector<Action> actions;
    EpisodeMeta meta;

    friend bool operator==(const Episode&, const Episode&) = default;
};

inline nlohmann::json meta_to_json(const EpisodeMeta& m) {
    using nlohmann::json;
    json bugs = json::array();
    for (const auto& b : m.enabled_bugs) {
        json w = json::array();
        for (const auto& win : b.windows) w.push_back({win.begin, win.end});
        bugs.push_back({{"kind", std::string(to_string(b.kind))},
                        {"target", b.target},
                        {"params", params_to_json(b.kind, b.params)},
                        {"windows", std::move(w)}});
    }
    return {{"schema_version", m.schema_version},
            {"seed", m.seed},
            {"scene_hash", m.scene_hash},
            {"partition", to_string(m.partition)},
            {"enabled_bugs", std::move(bugs)},
            {"frame_count", m.frame_count},
            {"observation_shape", {3, m.height, m.width}},
            {"has_masks", m.has_masks},
            {"agent", m.agent}};
}

inline EpisodeMeta meta_from_json(const nlohmann::json& j, const std::string& where) {
    EpisodeMeta m;
    try {
        m.schema_version = j.at("schema_version").get<int>();
        if (m.schema_version != kEpisodeSchemaVersion)
            throw DataIntegrityError(where + ": schema version " + std::to_string(m.schema_version) +
                                     " (expected " + std::to_string(kEpisodeSchemaVersion) + ")");
        m.seed = j.at("seed").get<std::uint64_t>();
        m.scene_hash = j.at("scene_hash").get<std::string>();
        m.partition = parse_partition(j.at("partition").get<std::string>());
        m.frame_count = j.at("frame_count").get<std::uint64_t>();
        const auto& shape = j.at("observation_shape");
        if (shape.size() != 3 || shape[0].get<int>() != 3) throw DataIntegrityError(where + ": bad observation_shape");
        m.height = shape[1].get<int>();
        m.width = shape[2].get<int>();
        m.has_masks = j.at("has_masks").get<bool>();
        m.agent = j.value("agent", nlohmann::json::object());
        for (const auto& b : j.at("enabled_bugs")) {
            EnabledBug e;
            e.kind = bug_kind_or_throw(b.at("kind").get<std::string>());
            e.target = b.at("target").get<std::string>();
            e.params = params_from_json(e.kind, b.at("params"));
            for (const auto& w : b.at("windows")) e.windows.push_back({w.at(0).get<std::uint64_t>(), w.at(1).get<std::uint64_t>()});
            m.enabled_bugs.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataIntegrityError(where + ": " + e.what());
    } catch (const ConfigError& e) {
        throw DataIntegrityError(where + ": " + e.what());
    }
    if ((m.partition == Partition::Normal) != m.enabled_bugs.empty())
        throw DataIntegrityError(where + ": enabled_bugs must be empty exactly for the normal partition");
    if (m.width <= 0 || m.height <= 0) throw DataIntegrityError(where + ": bad frame size");
    return m;
}

inline nlohmann::json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataIntegrityError(p.string() + ": " + e.what());
    }
}

inline void write_json_file(const std::filesystem::path& p, const nlohmann::json& j) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + p.string());
}

/// Appends frames to an episode directory as they are produced.
class EpisodeWriter {
public:
    EpisodeWriter(std::filesystem::path dir, bool store_masks) : dir_(std::move(dir)), store_masks_(store_masks) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
        open(obs_, "observations.bin");
        open(act_, "actions.bin");
        if (store_masks_) open(mask_, "masks.bin");
        std::filesystem::remove(dir_ / "meta.json", ec);
        if (!store_masks_) std::filesystem::remove(dir_ / "masks.bin", ec);
    }

    void append(const Frame& f, const MaskFrame* m, Action a) {
        put(obs_, f.data, "observations.bin");
        if (store_masks_) {
            if (!m) throw DataIntegrityError("episode writer: mask required");
            put(mask_, m->data, "masks.bin");
        }
        const char b = static_cast<char>(a);
        act_.write(&b, 1);
        ++count_;
    }

    /// Flushes the streams and writes meta.json last, so a complete meta
    /// marks a complete episode.
    void finish(EpisodeMeta meta) {
        meta.frame_count = count_;
        meta.has_masks = store_masks_;
        for (auto* s : {&obs_, &act_, &mask_})
            if (s->is_open()) {
                s->close();
                if (!*s) throw IoError("write failed in " + dir_.string());
            }
        write_json_file(dir_ / "meta.json", meta_to_json(meta));
    }

    std::uint64_t count() const { return count_; }

private:
    void open(std::ofstream& s, const char* name) {
        s.open(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!s) throw IoError("cannot write " + (dir_ / name).string());
    }
    void put(std::ofstream& s, const std::vector<std::uint8_t>& d, const char* name) {
        s.write(reinterpret_cast<const char*>(d.data()), std::streamsize(d.size()));
        if (!s) throw IoError("write failed: " + (dir_ / name).string());
    }

    std::filesystem::path dir_;
    bool store_masks_;
    std::ofstream obs_, act_, mask_;
    std::uint64_t count_ = 0;
};

inline void write_episode(const Episode& e, const std::filesystem::path& dir) {
    const bool masks = !e.masks.empty();
    if (masks && e.masks.size() != e.frames.size()) throw DataIntegrityError("episode: mask count differs from frame count");
    if (e.actions.size() != e.frames.size()) throw DataIntegrityError("episode: action count differs from frame count");
    EpisodeWriter w(dir, masks);
    for (std::size_t i = 0; i < e.frames.size(); ++i) w.append(e.frames[i], masks ? &e.masks[i] : nullptr, e.actions[i]);
    w.finish(e.meta);
}

/// Random access to the frames of an episode on disk without loading it.
class EpisodeReader {
public:
    explicit EpisodeReader(std::filesystem::path dir) : dir_(std::move(dir)) {
        meta_ = meta_from_json(read_json_file(dir_ / "meta.json"), (dir_ / "meta.json").string());
        stride_ = std::size_t(3) * meta_.width * meta_.height;
        check_size("observations.bin", stride_);
        check_size("actions.bin", 1);
        if (meta_.has_masks) check_size("masks.bin", stride_);
        obs_.open(dir_ / "observations.bin", std::ios::binary);
        if (!obs_) throw IoError("cannot open " + (dir_ / "observations.bin").string());
        if (meta_.has_masks) {
            mask_.open(dir_ / "masks.bin", std::ios::binary);
            if (!mask_) throw IoError("cannot open " + (dir_ / "masks.bin").string());
        }
    }

    const EpisodeMeta& meta() const { return meta_; }
    const std::filesystem::path& dir() const { return dir_; }
    std::uint64_t size() const { return meta_.frame_count; }
    std::size_t stride() const { return stride_; }

    Frame frame(std::uint64_t i) {
        Frame f(meta_.width, meta_.height);
        read(obs_, "observations.bin", i, f.data);
        return f;
    }
    /// Raw channel-major bytes of frame i into out (resized to stride).
    void frame_bytes(std::uint64_t i, std::vector<std::uint8_t>& out) {
        out.resize(stride_);
        read(obs_, "observations.bin", i, out);
    }
    MaskFrame mask(std::uint64_t i) {
        if (!meta_.has_masks) throw DataIntegrityError(dir_.string() + ": episode has no masks");
        MaskFrame m(meta_.width, meta_.height);
        read(mask_, "masks.bin", i, m.data);
        return m;
    }
    std::vector<Action> actions() const {
        std::ifstream in(dir_ / "actions.bin", std::ios::binary);
        std::vector<Action> out(meta_.frame_count);
        std::vector<char> raw(meta_.frame_count);
        in.read(raw.data(), std::streamsize(raw.size()));
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const auto v = static_cast<std::uint8_t>(raw[i]);
            if (v > 3) throw DataIntegrityError((dir_ / "actions.bin").string() + ": invalid action byte at " + std::to_string(i));
            out[i] = static_cast<Action>(v);
        }
        return out;
    }

private:
    void check_size(const char* name, std::size_t stride) const {
        const auto p = dir_ / name;
        std::error_code ec;
        const auto n = std::filesystem::file_size(p, ec);
        if (ec) throw IoError("cannot stat " + p.string() + ": " + ec.message());
        if (n % stride != 0)
            throw DataIntegrityError(p.string() + ": size " + std::to_string(n) + " is not a multiple of the frame stride " +
                                     std::to_string(stride) + " (truncated?)");
        if (n / stride != meta_.frame_count)
            throw DataIntegrityError(p.string() + ": holds " + std::to_string(n / stride) + " frames but meta.json says " +
                                     std::to_string(meta_.frame_count));
    }
    void read(std::ifstream& s, const char* name, std::uint64_t i, std::vector<std::uint8_t>& out) {
        if (i >= meta_.frame_count) throw DataIntegrityError(dir_.string() + ": frame index out of range");
        s.seekg(std::streamoff(i * stride_));
        s.read(reinterpret_cast<char*>(out.data()), std::streamsize(stride_));
        if (s.gcount() != std::streamsize(stride_)) throw DataIntegrityError((dir_ / name).string() + ": short read");
    }

    std::filesystem::path dir_;
    EpisodeMeta meta_;
    std::size_t stride_ = 0;
    std::ifstream obs_, mask_;
};

inline Episode read_episode(const std::filesystem::path& dir) {
    EpisodeReader r(dir);
    Episode e;
    e.meta = r.meta();
    e.actions = r.actions();
    for (std::uint64_t i = 0; i < r.size(); ++i) {
        e.frames.push_back(r.frame(i));
        if (e.meta.has_masks) e.masks.push_back(r.mask(i));
    }
    return e;
}

}  // namespace wob
