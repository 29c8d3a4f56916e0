#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wob/bugs/kinds.hpp"
#include "wob/bugs/state.hpp"
#include "wob/core/error.hpp"
#include "wob/core/rng.hpp"
#include "wob/scene/types.hpp"

namespace wob {

/// Tunables for all kinds. Each kind reads only its own fields; see
/// bug_param_keys() for which.
struct BugParams {
    double near_plane = 2.0;           // camera_clipping
    double uv_scale_min = 3.0;         // texture_corruption
    double uv_scale_max = 8.0;
    double uv_shear_max = 1.0;
    double hue_rotation_deg = 180.0;   // z_fighting
    double jitter_fraction = 0.15;     // geometry_corruption, of the bounding radius
    int tear_lag = 1;                  // screen_tear
    double tear_probability = 0.3;
    int frame_height = 84;
    double hole_size = 2.0;            // boundary_hole, side of the square patch (m)
    std::optional<Vec2> hole_center;   // x/z; picked from walkable cells when unset

    friend bool operator==(const BugParams&, const BugParams&) = default;
};

inline std::vector<std::string> bug_param_keys(BugKind k) {
    switch (k) {
        case BugKind::CameraClipping: return {"near_plane"};
        case BugKind::TextureCorruption: return {"uv_scale_min", "uv_scale_max", "uv_shear_max"};
        case BugKind::ZFighting: return {"hue_rotation_deg"};
        case BugKind::GeometryCorruption: return {"jitter_fraction"};
        case BugKind::ScreenTear: return {"tear_lag", "tear_probability", "frame_height"};
        case BugKind::BoundaryHole: return {"hole_size", "hole_center"};
        default: return {};
    }
}

/// Whether the kind acts on one scene object.
inline constexpr bool bug_needs_target(BugKind k) {
    switch (k) {
        case BugKind::TextureCorruption:
        case BugKind::TextureMissing:
        case BugKind::ZClipping:
        case BugKind::ZFighting:
        case BugKind::GeometryCorruption:
        case BugKind::GeometryClipping:
        case BugKind::BoundaryHole: return true;
        default: return false;
    }
}

inline void validate_params(BugKind k, const BugParams& p) {
    auto fail = [k](const std::string& what) { throw ConfigError(std::string(to_string(k)) + ": " + what); };
    auto finite = [](double v) { return std::isfinite(v); };
    switch (k) {
        case BugKind::CameraClipping:
            if (!finite(p.near_plane) || p.near_plane <= 0.0 || p.near_plane >= 100.0)
                fail("near_plane must be in (0, 100)");
            break;
        case BugKind::TextureCorruption:
            if (!finite(p.uv_scale_min) || !finite(p.uv_scale_max) || p.uv_scale_min <= 0 || p.uv_scale_max < p.uv_scale_min)
                fail("need 0 < uv_scale_min <= uv_scale_max");
            if (!finite(p.uv_shear_max) || p.uv_shear_max < 0) fail("uv_shear_max must be >= 0");
            break;
        case BugKind::ZFighting:
            if (!finite(p.hue_rotation_deg)) fail("hue_rotation_deg must be finite");
            break;
        case BugKind::GeometryCorruption:
            if (!finite(p.jitter_fraction) || p.jitter_fraction <= 0 || p.jitter_fraction > 1)
                fail("jitter_fraction must be in (0, 1]");
            break;
        case BugKind::ScreenTear:
            if (p.tear_lag < 1 || p.tear_lag > 8) fail("tear_lag must be in [1, 8]");
            if (!finite(p.tear_probability) || p.tear_probability < 0 || p.tear_probability > 1)
                fail("tear_probability must be in [0, 1]");
            if (p.frame_height < 2) fail("frame_height must be >= 2");
            break;
        case BugKind::BoundaryHole:
            if (!finite(p.hole_size) || p.hole_size <= 0) fail("hole_size must be positive");
            if (p.hole_center && (!finite(p.hole_center->x) || !finite(p.hole_center->y)))
                fail("hole_center must be finite");
            break;
        default: break;
    }
}

inline nlohmann::json params_to_json(BugKind k, const BugParams& p) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& key : bug_param_keys(k)) {
        if (key == "near_plane") j[key] = p.near_plane;
        else if (key == "uv_scale_min") j[key] = p.uv_scale_min;
        else if (key == "uv_scale_max") j[key] = p.uv_scale_max;
        else if (key == "uv_shear_max") j[key] = p.uv_shear_max;
        else if (key == "hue_rotation_deg") j[key] = p.hue_rotation_deg;
        else if (key == "jitter_fraction") j[key] = p.jitter_fraction;
        else if (key == "tear_lag") j[key] = p.tear_lag;
        else if (key == "tear_probability") j[key] = p.tear_probability;
        else if (key == "frame_height") j[key] = p.frame_height;
        else if (key == "hole_size") j[key] = p.hole_size;
        else if (key == "hole_center" && p.hole_center) j[key] = {p.hole_center->x, p.hole_center->y};
    }
    return j;
}

/// Reads the keys of kind k over the defaults; unknown keys are an error.
inline BugParams params_from_json(BugKind k, const nlohmann::json& j, BugParams p = {}) {
    const std::string where(to_string(k));
    if (!j.is_object()) throw ConfigError(where + ": params must be an object");
    const auto keys = bug_param_keys(k);
    for (const auto& [key, v] : j.items()) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError(where + ": unknown parameter '" + key + "'");
        auto num = [&]() {
            if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
            return v.get<double>();
        };
        auto integer = [&]() {
            if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
            return v.get<int>();
        };
        if (key == "near_plane") p.near_plane = num();
        else if (key == "uv_scale_min") p.uv_scale_min = num();
        else if (key == "uv_scale_max") p.uv_scale_max = num();
        else if (key == "uv_shear_max") p.uv_shear_max = num();
        else if (key == "hue_rotation_deg") p.hue_rotation_deg = num();
        else if (key == "jitter_fraction") p.jitter_fraction = num();
        else if (key == "tear_lag") p.tear_lag = integer();
        else if (key == "tear_probability") p.tear_probability = num();
        else if (key == "frame_height") p.frame_height = integer();
        else if (key == "hole_size") p.hole_size = num();
        else if (key == "hole_center") {
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                throw ConfigError(where + ".hole_center: expected [x, z]");
            p.hole_center = Vec2{v[0].get<double>(), v[1].get<double>()};
        }
    }
    validate_params(k, p);
    return p;
}

struct BugEntry {
    BugParams params;
    std::string target;  // empty for kinds without a target

    friend bool operator==(const BugEntry&, const BugEntry&) = default;
};

/// Which bugs are switched on for one world, with their parameters and
/// targets. Targets not given explicitly are drawn uniformly from the eligible
/// objects with a stream keyed by (seed, kind), so one kind's draw never
/// depends on which other kinds are enabled.
class BugController {
public:
    BugController() = default;
    BugController(const World& world, std::uint64_t seed) : seed_(seed), floor_id_(world.floor.object_id) {
        for (const auto& o : world.objects)
            if (o.render_layer <= 0) objects_.push_back({o.id, !o.texture.missing(), o.collidable, o.boundary});
        for (int r = 0; r < world.walkable_grid.rows; ++r)
            for (int c = 0; c < world.walkable_grid.cols; ++c)
                if (world.walkable_grid.is_walkable({c, r})) walkable_.push_back(world.walkable_grid.center({c, r}));
    }

    std::uint64_t seed() const { return seed_; }

    /// Object ids the kind may target in this world.
    std::vector<std::string> eligible_targets(BugKind k) const {
        std::vector<std::string> ids;
        if (k == BugKind::BoundaryHole) {
            ids.push_back(floor_id_);
            return ids;
        }
        if (!bug_needs_target(k)) return ids;
        for (const auto& o : objects_)
            if (eligible(k, o)) ids.push_back(o.id);
        return ids;
    }

    BugController& enable(BugKind k, const BugParams& params = {}, const std::optional<std::string>& target = {}) {
        validate_params(k, params);
        BugEntry e{params, {}};
        if (!bug_needs_target(k)) {
            if (target && !target->empty())
                throw ConfigError(std::string(to_string(k)) + ": this kind takes no target object");
        } else if (target && !target->empty()) {
            const auto ids = eligible_targets(k);
            if (std::find(ids.begin(), ids.end(), *target) == ids.end()) {
                const bool exists = *target == floor_id_ || std::any_of(objects_.begin(), objects_.end(),
                                                                        [&](const Info& o) { return o.id == *target; });
                throw ConfigError(std::string(to_string(k)) + ": " +
                                  (exists ? "object '" + *target + "' is not a valid target for this kind"
                                          : "target object '" + *target + "' not found"));
            }
            e.target = *target;
        } else {
            const auto ids = eligible_targets(k);
            if (ids.empty()) throw ConfigError(std::string(to_string(k)) + ": no eligible target object in this world");
            Rng rng(hash_combine(seed_, 0x7a67ULL, std::uint64_t(index_of(k))));
            e.target = ids[rng.below(ids.size())];
        }
        if (k == BugKind::BoundaryHole && !e.params.hole_center) {
            if (walkable_.empty()) throw ConfigError("boundary_hole: no walkable cell to place the hole");
            Rng rng(hash_combine(seed_, 0x401eULL));
            e.params.hole_center = walkable_[rng.below(walkable_.size())];
        }
        entries_[index_of(k)] = std::move(e);
        return *this;
    }

    BugController& disable(BugKind k) {
        entries_[index_of(k)].reset();
        return *this;
    }

    bool enabled(BugKind k) const { return entries_[index_of(k)].has_value(); }
    std::vector<BugKind> enabled_kinds() const {
        std::vector<BugKind> out;
        for (auto k : kAllBugKinds)
            if (enabled(k)) out.push_back(k);
        return out;
    }
    const BugEntry& entry(BugKind k) const {
        if (!enabled(k)) throw ConfigError(std::string(to_string(k)) + " is not enabled");
        return *entries_[index_of(k)];
    }
    const std::string& floor_id() const { return floor_id_; }

    friend bool operator==(const BugController& a, const BugController& b) {
        return a.seed_ == b.seed_ && a.entries_ == b.entries_;
    }

private:
    struct Info {
        std::string id;
        bool textured = false;
        bool collidable = false;
        bool boundary = false;
    };

    bool eligible(BugKind k, const Info& o) const {
        if (o.id == floor_id_ || o.boundary) return false;
        switch (k) {
            case BugKind::TextureCorruption:
            case BugKind::TextureMissing:
            case BugKind::ZFighting: return o.textured;
            case BugKind::GeometryClipping: return o.collidable;
            default: return true;
        }
    }

    std::uint64_t seed_ = 0;
    std::string floor_id_ = "floor";
    std::vector<Info> objects_;
    std::vector<Vec2> walkable_;
    std::array<std::optional<BugEntry>, kBugKindCount> entries_;
};

namespace bug_detail {

inline Rgb rotate_hue(Rgb c, double degrees) {
    const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b}), d = mx - mn;
    double h = 0.0;
    if (d > 0) {
        if (mx == r) h = std::fmod((g - b) / d, 6.0);
        else if (mx == g) h = (b - r) / d + 2.0;
        else h = (r - g) / d + 4.0;
    }
    const double s = mx > 0 ? d / mx : 0.0, v = mx;
    h = std::fmod(h * 60.0 + degrees, 360.0);
    if (h < 0) h += 360.0;
    const double cc = v * s, x = cc * (1 - std::abs(std::fmod(h / 60.0, 2.0) - 1)), m = v - cc;
    double rr = 0, gg = 0, bb = 0;
    switch (int(h / 60.0) % 6) {
        case 0: rr = cc, gg = x; break;
        case 1: rr = x, gg = cc; break;
        case 2: gg = cc, bb = x; break;
        case 3: gg = x, bb = cc; break;
        case 4: rr = x, bb = cc; break;
        default: rr = cc, bb = x; break;
    }
    auto q = [](double u) { return static_cast<std::uint8_t>(std::clamp(std::lround(u * 255.0), 0L, 255L)); };
    return {q(rr + m), q(gg + m), q(bb + m)};
}

inline std::shared_ptr<const RgbImage> hue_rotated(const RgbImage& src, double degrees) {
    auto out = std::make_shared<RgbImage>(src.width, src.height);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) out->set(x, y, rotate_hue(src.at(x, y), degrees));
    return out;
}

/// Offset uniform in the ball of radius r, keyed by a hash.
inline Vec3 ball_offset(std::uint64_t key, double r) {
    Rng rng(key);
    for (;;) {
        const Vec3 p{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        if (dot(p, p) <= 1.0) return p * r;
    }
}

inline std::uint64_t quantize(double v) { return static_cast<std::uint64_t>(std::llround(v * 1e4)); }

inline std::uint64_t kind_seed(const BugController& c, BugKind k) {
    return hash_combine(c.seed(), std::uint64_t(index_of(k)));
}

}  // namespace bug_detail

/// Resolves the enabled bugs into the state for one frame. Pure: the same
/// controller, world and frame index always give the same state.
inline BugState apply_bugs(const BugController& ctl, const World& world, std::uint64_t frame_index) {
    using namespace bug_detail;
    BugState state;
    state.active = ctl.enabled_kinds();
    if (state.active.empty()) return state;

    World w = world;
    bool world_changed = false;
    bool colliders_changed = false;
    auto target = [&](BugKind k) -> SceneObject& {
        auto* o = w.find(ctl.entry(k).target);
        if (!o) throw ConfigError(std::string(to_string(k)) + ": target '" + ctl.entry(k).target + "' not in world");
        world_changed = true;
        return *o;
    };

    for (auto k : state.active) {
        const auto& p = ctl.entry(k).params;
        switch (k) {
            case BugKind::CameraClipping: state.near_plane_override = p.near_plane; break;
            case BugKind::TextureCorruption: {
                auto& o = target(k);
                Rng rng(kind_seed(ctl, k));
                const double su = rng.uniform(p.uv_scale_min, p.uv_scale_max);
                const double sv = rng.uniform(p.uv_scale_min, p.uv_scale_max);
                const double sh = rng.uniform(-p.uv_shear_max, p.uv_shear_max);
                const double ou = rng.uniform(), ov = rng.uniform();
                const auto& m = o.uv_transform.m;
                // A * old, with A = [su sh ou; 0 sv ov]
                o.uv_transform = UvTransform{{su * m[0] + sh * m[3], su * m[1] + sh * m[4], su * m[2] + sh * m[5] + ou,
                                              sv * m[3], sv * m[4], sv * m[5] + ov}};
                o.bug_tag = BugTag::of(k);
                break;
            }
            case BugKind::TextureMissing: {
                auto& o = target(k);
                o.texture = TextureRef{};
                o.bug_tag = BugTag::of(k);
                break;
            }
            case BugKind::ZClipping: {
                auto& o = target(k);
                o.render_layer = 1;
                o.bug_tag = BugTag::of(k);
                break;
            }
            case BugKind::ZFighting: {
                auto& o = target(k);
                o.bug_tag = BugTag::of(k);
                SceneObject twin = o;
                twin.id = o.id + "#zfight";
                twin.collidable = false;
                if (!o.texture.missing()) twin.texture = {o.texture.path + "#hue", hue_rotated(*o.texture.image, p.hue_rotation_deg)};
                w.objects.push_back(std::move(twin));
                break;
            }
            case BugKind::GeometryCorruption: {
                auto& o = target(k);
                const double r = p.jitter_fraction * o.mesh.bounding_radius();
                const auto ks = kind_seed(ctl, k);
                for (auto& v : o.mesh.vertices)
                    v = v + ball_offset(hash_combine(ks, frame_index, quantize(v.x), quantize(v.y), quantize(v.z)), r);
                o.bug_tag = BugTag::of(k);
                break;
            }
            case BugKind::BlackScreen: state.frame_effects.black_screen = true; break;
            case BugKind::ScreenTear: {
                const auto ks = kind_seed(ctl, k);
                if (frame_index >= std::uint64_t(p.tear_lag) && hashed_uniform(ks, frame_index) < p.tear_probability) {
                    const auto h = hash_combine(ks, frame_index, 0x7ea5ULL);
                    const int row = 1 + int(h % std::uint64_t(p.frame_height - 1));
                    state.frame_effects.tear = ScreenTearEffect{row, p.tear_lag};
                }
                break;
            }
            case BugKind::GeometryClipping: {
                auto& o = target(k);
                o.collidable = false;
                state.backface_kinds[o.id] = k;
                colliders_changed = true;
                break;
            }
            case BugKind::BoundaryHole: {
                const Vec2 c = *p.hole_center;
                const double h = p.hole_size / 2;
                w.floor.holes.push_back({c.x - h, c.y - h, c.x + h, c.y + h});
                state.backface_kinds[w.floor.object_id] = k;
                world_changed = true;
                break;
            }
        }
    }
    if (colliders_changed) w.walkable_grid = build_nav_grid(w);
    if (world_changed) state.world_delta = std::move(w);
    return state;
}

}  // namespace wob
