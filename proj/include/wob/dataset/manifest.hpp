#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wob/dataset/generator.hpp"

namespace wob {

inline constexpr int kManifestSchemaVersion = 1;

/// Frame budgets at scale 1. Scaled budgets are rounded to whole hundreds.
struct DatasetConfig {
    double scale = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t normal_frames = 300000;
    std::uint64_t bugged_frames = 300000;
    std::uint64_t test_frames_per_kind = 60000;
    std::uint64_t episode_length = 5000;
    std::uint64_t test_episode_length = 500;
    int min_bugs_per_episode = 1;
    int max_bugs_per_episode = 3;
    std::uint64_t window_length = 50;
    double duty_cycle = 0.2;
    bool attract = true;
    AgentConfig agent;

    void validate() const {
        if (!(scale > 0) || !std::isfinite(scale)) throw ConfigError("dataset.scale must be positive");
        if (episode_length == 0 || test_episode_length == 0) throw ConfigError("dataset episode lengths must be positive");
        if (min_bugs_per_episode < 1 || max_bugs_per_episode < min_bugs_per_episode || max_bugs_per_episode > kBugKindCount)
            throw ConfigError("dataset bugs per episode must satisfy 1 <= min <= max <= " + std::to_string(kBugKindCount));
        GeneratorConfig g;
        g.window_length = window_length;
        g.duty_cycle = duty_cycle;
        g.agent = agent;
        g.validate();
    }
};

inline std::uint64_t scaled_frames(std::uint64_t base, double scale) {
    const double hundreds = std::round(double(base) * scale / 100.0);
    return std::max<std::uint64_t>(100, std::uint64_t(hundreds) * 100);
}

struct ManifestEntry {
    std::string dir;  // relative to the dataset root
    std::uint64_t frames = 0;
    std::uint64_t seed = 0;
    std::vector<BugKind> kinds;
    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
    int schema_version = kManifestSchemaVersion;
    std::string scene_hash;
    double scale = 1.0;
    std::uint64_t seed = 0;
    std::vector<ManifestEntry> normal;
    std::vector<ManifestEntry> bugged;
    std::map<BugKind, std::vector<ManifestEntry>> test;

    static std::uint64_t frames(const std::vector<ManifestEntry>& es) {
        std::uint64_t n = 0;
        for (const auto& e : es) n += e.frames;
        return n;
    }
    friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// Episodes to generate, in seed order: normal, bugged, then test by kind.
struct DatasetPlan {
    struct Item {
        EpisodeSpec spec;
        std::uint64_t frames = 0;
        std::string dir;
    };
    std::vector<Item> items;

    std::uint64_t bytes(int width = kFrameWidth, int height = kFrameHeight) const {
        const std::uint64_t stride = 3ull * width * height;
        std::uint64_t n = 0;
        for (const auto& it : items) n += it.frames * (stride * (it.spec.partition == Partition::Normal ? 1 : 2) + 1) + 4096;
        return n;
    }
};

namespace manifest_detail {

inline std::string episode_dir(const std::string& prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ep_%05zu", i);
    return prefix + "/" + buf;
}

inline void split(std::vector<std::uint64_t>& out, std::uint64_t total, std::uint64_t len) {
    for (std::uint64_t left = total; left > 0; left -= std::min(left, len)) out.push_back(std::min(left, len));
}

}  // namespace manifest_detail

inline DatasetPlan plan_dataset(const DatasetConfig& cfg) {
    using namespace manifest_detail;
    cfg.validate();
    DatasetPlan plan;
    std::uint64_t index = 0;
    auto add = [&](Partition p, std::vector<BugRequest> bugs, std::uint64_t frames, std::string dir) {
        plan.items.push_back({{p, cfg.seed + index++, std::move(bugs)}, frames, std::move(dir)});
    };

    std::vector<std::uint64_t> lens;
    split(lens, scaled_frames(cfg.normal_frames, cfg.scale), cfg.episode_length);
    for (std::size_t i = 0; i < lens.size(); ++i) add(Partition::Normal, {}, lens[i], episode_dir("normal", i));

    lens.clear();
    split(lens, scaled_frames(cfg.bugged_frames, cfg.scale), cfg.episode_length);
    Rng pick(hash_combine(cfg.seed, 0x6b1d));
    for (std::size_t i = 0; i < lens.size(); ++i) {
        std::vector<BugKind> pool(kAllBugKinds.begin(), kAllBugKinds.end());
        const int n = cfg.min_bugs_per_episode + int(pick.below(std::uint64_t(cfg.max_bugs_per_episode - cfg.min_bugs_per_episode + 1)));
        std::vector<BugRequest> bugs;
        for (int j = 0; j < n; ++j) {
            const auto at = pick.below(pool.size());
            bugs.push_back({pool[at], {}, {}});
            pool.erase(pool.begin() + std::ptrdiff_t(at));
        }
        std::sort(bugs.begin(), bugs.end(), [](const BugRequest& a, const BugRequest& b) { return a.kind < b.kind; });
        add(Partition::Bugged, std::move(bugs), lens[i], episode_dir("bugged", i));
    }

    const std::uint64_t per_kind = scaled_frames(cfg.test_frames_per_kind, cfg.scale);
    for (auto k : kAllBugKinds) {
        lens.clear();
        split(lens, per_kind, cfg.test_episode_length);
        for (std::size_t i = 0; i < lens.size(); ++i)
            add(Partition::Test, {{k, {}, {}}}, lens[i], episode_dir("test/" + std::string(to_string(k)), i));
    }
    return plan;
}

inline nlohmann::json manifest_to_json(const Manifest& m) {
    using nlohmann::json;
    auto list = [](const std::vector<ManifestEntry>& es) {
        json a = json::array();
        for (const auto& e : es) {
            json kinds = json::array();
            for (auto k : e.kinds) kinds.push_back(std::string(to_string(k)));
            a.push_back({{"dir", e.dir}, {"frames", e.frames}, {"seed", e.seed}, {"kinds", kinds}});
        }
        return a;
    };
    json test = json::object();
    json counts = {{"normal", Manifest::frames(m.normal)}, {"bugged", Manifest::frames(m.bugged)}};
    for (const auto& [k, es] : m.test) {
        test[std::string(to_string(k))] = list(es);
        counts["test"][std::string(to_string(k))] = Manifest::frames(es);
    }
    return {{"schema_version", m.schema_version}, {"scene_hash", m.scene_hash}, {"scale", m.scale}, {"seed", m.seed},
            {"counts", counts}, {"normal", list(m.normal)}, {"bugged", list(m.bugged)}, {"test", test}};
}

inline Manifest manifest_from_json(const nlohmann::json& j, const std::string& where) {
    Manifest m;
    auto list = [&](const nlohmann::json& a) {
        std::vector<ManifestEntry> out;
        for (const auto& e : a) {
            ManifestEntry me{e.at("dir").get<std::string>(), e.at("frames").get<std::uint64_t>(), e.at("seed").get<std::uint64_t>(), {}};
            for (const auto& k : e.at("kinds")) me.kinds.push_back(bug_kind_or_throw(k.get<std::string>()));
            out.push_back(std::move(me));
        }
        return out;
    };
    try {
        m.schema_version = j.at("schema_version").get<int>();
        if (m.schema_version != kManifestSchemaVersion)
            throw DataIntegrityError(where + ": manifest schema version " + std::to_string(m.schema_version));
        m.scene_hash = j.at("scene_hash").get<std::string>();
        m.scale = j.at("scale").get<double>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.normal = list(j.at("normal"));
        m.bugged = list(j.at("bugged"));
        for (const auto& [k, a] : j.at("test").items()) m.test[bug_kind_or_throw(k)] = list(a);
    } catch (const nlohmann::json::exception& e) {
        throw DataIntegrityError(where + ": " + e.what());
    } catch (const ConfigError& e) {
        throw DataIntegrityError(where + ": " + e.what());
    }
    return m;
}

inline Manifest load_manifest(const std::filesystem::path& root) {
    const auto p = root / "manifest.json";
    return manifest_from_json(read_json_file(p), p.string());
}

using ProgressFn = std::function<void(std::size_t done, std::size_t total, const std::string& dir)>;

/// Generates every episode of the plan under root and writes manifest.json.
inline Manifest build_dataset(const World& world, const DatasetConfig& cfg, const std::filesystem::path& root,
                              const ProgressFn& progress = {}) {
    const DatasetPlan plan = plan_dataset(cfg);
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());
    const auto need = plan.bytes();
    const auto space = std::filesystem::space(root, ec);
    if (!ec && space.available < need)
        throw IoError("not enough disk space under " + root.string() + ": need about " + std::to_string(need >> 20) +
                      " MiB, " + std::to_string(space.available >> 20) + " MiB available");

    Manifest m;
    m.scene_hash = scene_hash(world);
    m.scale = cfg.scale;
    m.seed = cfg.seed;
    for (std::size_t i = 0; i < plan.items.size(); ++i) {
        const auto& it = plan.items[i];
        GeneratorConfig g;
        g.frames = it.frames;
        g.window_length = cfg.window_length;
        g.duty_cycle = cfg.duty_cycle;
        g.attract = cfg.attract;
        g.agent = cfg.agent;
        generate_episode_to_dir(world, it.spec, g, root / it.dir);
        ManifestEntry e{it.dir, it.frames, it.spec.seed, {}};
        for (const auto& b : it.spec.bugs) e.kinds.push_back(b.kind);
        switch (it.spec.partition) {
            case Partition::Normal: m.normal.push_back(e); break;
            case Partition::Bugged: m.bugged.push_back(e); break;
            case Partition::Test: m.test[e.kinds.front()].push_back(e); break;
        }
        if (progress) progress(i + 1, plan.items.size(), it.dir);
    }
    write_json_file(root / "manifest.json", manifest_to_json(m));
    return m;
}

struct DatasetCheck {
    std::uint64_t normal_frames = 0;
    std::uint64_t bugged_frames = 0;
    std::map<BugKind, std::uint64_t> test_frames;
};

/// Streams over every episode: meta and file sizes must agree with the
/// manifest, partitions must be pure and stored masks may only carry tags of
/// the episode's own bugs.
inline DatasetCheck verify_dataset(const std::filesystem::path& root) {
    const Manifest m = load_manifest(root);
    DatasetCheck out;
    auto check = [&](const ManifestEntry& e, Partition want) {
        EpisodeReader r(root / e.dir);
        const auto& meta = r.meta();
        const std::string where = (root / e.dir).string();
        if (meta.partition != want) throw DataIntegrityError(where + ": partition " + to_string(meta.partition) + ", expected " + to_string(want));
        if (meta.frame_count != e.frames) throw DataIntegrityError(where + ": frame count differs from manifest");
        if (meta.scene_hash != m.scene_hash) throw DataIntegrityError(where + ": scene hash differs from manifest");
        if (want == Partition::Test && meta.enabled_bugs.size() != 1) throw DataIntegrityError(where + ": test episode with several bug kinds");
        std::array<bool, kBugKindCount> allowed{};
        for (const auto& b : meta.enabled_bugs) allowed[index_of(b.kind)] = true;
        if (meta.has_masks) {
            for (std::uint64_t i = 0; i < r.size(); ++i) {
                const MaskFrame mk = r.mask(i);
                for (std::size_t p = 0, n = mk.plane(); p < n; ++p) {
                    const Rgb c{mk.data[p], mk.data[n + p], mk.data[2 * n + p]};
                    if (c.is_black()) continue;
                    const auto k = kind_from_color(c);
                    if (!k || !allowed[index_of(*k)])
                        throw DataIntegrityError(where + ": frame " + std::to_string(i) + " carries a foreign bug tag");
                }
            }
        }
        return meta.frame_count;
    };
    for (const auto& e : m.normal) out.normal_frames += check(e, Partition::Normal);
    for (const auto& e : m.bugged) out.bugged_frames += check(e, Partition::Bugged);
    for (const auto& [k, es] : m.test)
        for (const auto& e : es) out.test_frames[k] += check(e, Partition::Test);
    return out;
}

}  // namespace wob
