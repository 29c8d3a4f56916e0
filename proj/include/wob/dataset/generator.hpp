#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wob/agent/agent.hpp"
#include "wob/bugs/controller.hpp"
#include "wob/dataset/episode.hpp"
#include "wob/render/renderer.hpp"
#include "wob/scene/scene_io.hpp"

namespace wob {

struct GeneratorConfig {
    std::uint64_t frames = 5000;
    /// Bugs switch on in windows of this many frames; 0 keeps them on throughout.
    std::uint64_t window_length = 50;
    double duty_cycle = 0.2;
    /// At the start of a window, send the agent toward the bug's target.
    bool attract = true;
    /// Store masks.bin; normal episodes omit it unless asked.
    std::optional<bool> store_masks;
    AgentConfig agent;

    void validate() const {
        if (frames == 0) throw ConfigError("generator.frames must be positive");
        if (!(duty_cycle > 0 && duty_cycle <= 1)) throw ConfigError("generator.duty_cycle must be in (0, 1]");
        agent.validate();
    }
    std::uint64_t period() const {
        return std::max<std::uint64_t>(window_length, std::uint64_t(std::llround(double(window_length) / duty_cycle)));
    }
};

struct BugRequest {
    BugKind kind = BugKind::BlackScreen;
    BugParams params;
    std::optional<std::string> target;
};

struct EpisodeSpec {
    Partition partition = Partition::Normal;
    std::uint64_t seed = 0;
    std::vector<BugRequest> bugs;
};

/// One window per period, at a uniformly random offset inside the period.
inline std::vector<Window> schedule_windows(const GeneratorConfig& cfg, std::uint64_t seed, BugKind k) {
    if (cfg.window_length == 0) return {{0, cfg.frames}};
    const std::uint64_t period = cfg.period();
    Rng rng(hash_combine(seed, 0x3d1, index_of(k)));
    std::vector<Window> out;
    for (std::uint64_t base = 0; base < cfg.frames; base += period) {
        const std::uint64_t start = base + rng.below(period - cfg.window_length + 1);
        if (start >= cfg.frames) break;
        out.push_back({start, std::min(start + cfg.window_length, cfg.frames)});
    }
    return out;
}

namespace gen_detail {

inline bool in_any(const std::vector<Window>& ws, std::uint64_t t) {
    return std::any_of(ws.begin(), ws.end(), [t](const Window& w) { return w.contains(t); });
}

inline void record(std::vector<Window>& out, std::uint64_t t) {
    if (!out.empty() && out.back().end == t) out.back().end = t + 1;
    else out.push_back({t, t + 1});
}

/// A bug whose visible effect depends on the agent's body stays on until the
/// agent is clear of it, otherwise the leftover view would carry another tag.
inline bool must_linger(BugKind k, const BugEntry& e, const World& world, const AgentState& a) {
    const Vec3 p = a.pose.position;
    if (k == BugKind::BoundaryHole) return p.y < world.floor.height - 1e-6 || a.vertical_velocity != 0.0;
    if (k == BugKind::GeometryClipping) {
        const auto* o = world.find(e.target);
        if (!o) return false;
        const auto& body = world.agent_body;
        return cylinder_hits_box(p.x, p.z, body.radius, p.y, p.y + body.height, o->world_bounds());
    }
    return false;
}

inline bool body_driven(BugKind k) { return k == BugKind::BoundaryHole || k == BugKind::GeometryClipping; }

inline std::optional<Vec2> attraction_point(BugKind k, const BugEntry& e, const World& world) {
    if (k == BugKind::BoundaryHole) return e.params.hole_center;
    if (!bug_needs_target(k)) return std::nullopt;
    const auto* o = world.find(e.target);
    if (!o) return std::nullopt;
    const Aabb b = o->world_bounds();
    return Vec2{(b.lo.x + b.hi.x) / 2, (b.lo.z + b.hi.z) / 2};
}

}  // namespace gen_detail

using FrameSink = std::function<void(const Frame&, const MaskFrame&, Action)>;

/// Runs one episode and hands every frame to sink. The observation at step t
/// is rendered before the agent acts, and actions[t] is the action it took.
inline EpisodeMeta run_episode(const World& world, const EpisodeSpec& spec, const GeneratorConfig& cfg, const FrameSink& sink) {
    using namespace gen_detail;
    cfg.validate();
    if ((spec.partition == Partition::Normal) != spec.bugs.empty())
        throw ConfigError("episode: bugs must be empty exactly for the normal partition");
    if (spec.partition == Partition::Test && spec.bugs.size() != 1)
        throw ConfigError("episode: test episodes carry exactly one bug kind");

    BugController full(world, hash_combine(spec.seed, 0xb0b));
    for (const auto& b : spec.bugs) {
        if (full.enabled(b.kind)) throw ConfigError(std::string("episode: bug '") + std::string(to_string(b.kind)) + "' listed twice");
        full.enable(b.kind, b.params, b.target);
    }
    const auto kinds = full.enabled_kinds();
    std::array<std::vector<Window>, kBugKindCount> scheduled, actual;
    std::array<bool, kBugKindCount> was_on{};
    // Body-driven bugs stay on while the agent is still walking to the target.
    std::array<std::optional<Vec2>, kBugKindCount> en_route;
    std::array<std::uint64_t, kBugKindCount> opened{};
    for (auto k : kinds) scheduled[index_of(k)] = schedule_windows(cfg, spec.seed, k);

    Agent agent(cfg.agent, spec.seed);
    agent.spawn(world);
    Screen screen;
    const std::uint64_t render_seed = hash_combine(spec.seed, 0x5e7);

    for (std::uint64_t t = 0; t < cfg.frames; ++t) {
        BugController ctl = full;
        std::optional<Vec2> pull;
        for (auto k : kinds) {
            const int i = index_of(k);
            bool on = in_any(scheduled[i], t);
            if (en_route[i]) {
                const Vec3 p = agent.state().pose.position;
                const Vec2 d = *en_route[i] - Vec2{p.x, p.z};
                if (std::hypot(d.x, d.y) < 1.0 || t >= opened[i] + 4 * std::max<std::uint64_t>(cfg.window_length, 1))
                    en_route[i].reset();
            }
            if (!on && was_on[i]) on = en_route[i] || must_linger(k, full.entry(k), world, agent.state());
            if (on && !was_on[i]) {
                opened[i] = t;
                if (cfg.attract && !pull) {
                    pull = attraction_point(k, full.entry(k), world);
                    if (pull && body_driven(k)) en_route[i] = pull;
                }
            }
            if (on) record(actual[i], t);
            else ctl.disable(k);
            was_on[i] = on;
        }
        const BugState state = apply_bugs(ctl, world, t);
        const World& wt = state.world(world);
        if (pull) agent.set_goal(*pull);
        const auto [frame, mask] = screen.present(world, agent_camera(wt, agent.state().pose), state, t, render_seed);
        for (std::size_t p = 0, n = mask.plane(); p < n; ++p) {
            const Rgb c{mask.data[p], mask.data[n + p], mask.data[2 * n + p]};
            if (c.is_black()) continue;
            const auto k = kind_from_color(c);
            if (!k || std::find(state.active.begin(), state.active.end(), *k) == state.active.end())
                throw DataIntegrityError("episode seed " + std::to_string(spec.seed) + " frame " + std::to_string(t) +
                                         ": mask carries a tag for a bug that is not active");
        }
        const auto res = agent.step(wt);
        sink(frame, mask, res.action);
    }

    EpisodeMeta meta;
    meta.seed = spec.seed;
    meta.scene_hash = scene_hash(world);
    meta.partition = spec.partition;
    meta.frame_count = cfg.frames;
    meta.agent = to_json(cfg.agent);
    for (auto k : kinds) {
        const auto& e = full.entry(k);
        meta.enabled_bugs.push_back({k, e.target, e.params, actual[index_of(k)]});
    }
    return meta;
}

inline bool stores_masks(const EpisodeSpec& spec, const GeneratorConfig& cfg) {
    return cfg.store_masks.value_or(spec.partition != Partition::Normal);
}

inline Episode generate_episode(const World& world, const EpisodeSpec& spec, const GeneratorConfig& cfg) {
    Episode e;
    const bool masks = stores_masks(spec, cfg);
    e.meta = run_episode(world, spec, cfg, [&](const Frame& f, const MaskFrame& m, Action a) {
        e.frames.push_back(f);
        if (masks) e.masks.push_back(m);
        e.actions.push_back(a);
    });
    e.meta.has_masks = masks;
    return e;
}

inline EpisodeMeta generate_episode_to_dir(const World& world, const EpisodeSpec& spec, const GeneratorConfig& cfg,
                                           const std::filesystem::path& dir) {
    EpisodeWriter w(dir, stores_masks(spec, cfg));
    auto meta = run_episode(world, spec, cfg, [&](const Frame& f, const MaskFrame& m, Action a) { w.append(f, &m, a); });
    w.finish(meta);
    meta.has_masks = stores_masks(spec, cfg);
    return meta;
}

}  // namespace wob
