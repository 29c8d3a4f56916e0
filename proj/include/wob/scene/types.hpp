#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "wob/agent/navgrid.hpp"
#include "wob/bugs/kinds.hpp"
#include "wob/core/error.hpp"
#include "wob/core/image.hpp"
#include "wob/core/math.hpp"

namespace wob {

/// Uniform bright pink used for objects without a texture.
inline constexpr Rgb kMissingTextureColor{255, 0, 255};

using Triangle = std::array<std::uint32_t, 3>;

/// Triangle mesh with counter-clockwise front faces (seen from outside).
struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<Vec3> normals;
    std::vector<Vec2> uvs;
    std::vector<Triangle> triangles;

    friend bool operator==(const Mesh&, const Mesh&) = default;

    /// Throws ConfigError naming the first violated invariant.
    void validate(const std::string& owner) const {
        const auto n = vertices.size();
        if (normals.size() != n || uvs.size() != n)
            throw ConfigError(owner + ": normals/uvs must match vertex count");
        for (const auto& t : triangles)
            for (auto i : t)
                if (i >= n) throw ConfigError(owner + ": triangle index " + std::to_string(i) + " out of range");
        for (const auto& nm : normals)
            if (std::abs(length(nm) - 1.0) > 1e-6) throw ConfigError(owner + ": normal is not unit length");
        for (const auto& uv : uvs)
            if (!std::isfinite(uv.x) || !std::isfinite(uv.y)) throw ConfigError(owner + ": non-finite uv");
        for (const auto& v : vertices)
            if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
                throw ConfigError(owner + ": non-finite vertex");
    }

    double bounding_radius() const {
        if (vertices.empty()) return 0.0;
        Vec3 lo = vertices.front(), hi = vertices.front();
        for (const auto& v : vertices) {
            lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
            hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
        }
        const Vec3 c = (lo + hi) * 0.5;
        double r = 0.0;
        for (const auto& v : vertices) r = std::max(r, length(v - c));
        return r;
    }
};

/// A texture image plus the path it was loaded from (kept for serialization).
/// A null image means the texture is missing.
struct TextureRef {
    std::string path;
    std::shared_ptr<const RgbImage> image;

    bool missing() const { return image == nullptr; }
    friend bool operator==(const TextureRef& a, const TextureRef& b) {
        if (a.path != b.path || a.missing() != b.missing()) return false;
        return a.missing() || a.image == b.image || *a.image == *b.image;
    }
};

/// 2D affine map on texture coordinates: u' = a*u + b*v + c, v' = d*u + e*v + f.
struct UvTransform {
    std::array<double, 6> m{1, 0, 0, 0, 1, 0};

    Vec2 apply(Vec2 uv) const { return {m[0] * uv.x + m[1] * uv.y + m[2], m[3] * uv.x + m[4] * uv.y + m[5]}; }
    static UvTransform scale(double su, double sv) { return {{su, 0, 0, 0, sv, 0}}; }
    friend bool operator==(const UvTransform&, const UvTransform&) = default;
};

/// Rigid pose about the y axis plus per-axis scale.
struct Transform {
    Vec3 position;
    double yaw = 0.0;
    Vec3 scale{1, 1, 1};

    Vec3 apply(Vec3 p) const {
        const Vec3 s{p.x * scale.x, p.y * scale.y, p.z * scale.z};
        const double c = std::cos(yaw), sn = std::sin(yaw);
        // Same handedness as yaw_forward: +x rotates towards -z for positive yaw.
        return {c * s.x + sn * s.z + position.x, s.y + position.y, -sn * s.x + c * s.z + position.z};
    }
    friend bool operator==(const Transform&, const Transform&) = default;
};

struct Aabb {
    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

    void extend(Vec3 p) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    bool contains(Vec3 p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
    }
};

struct SceneObject {
    std::string id;
    Mesh mesh;
    TextureRef texture;
    UvTransform uv_transform;
    Transform transform;
    bool collidable = true;
    int render_layer = 0;
    std::optional<BugTag> bug_tag;
    /// Part of the level boundary (outer walls); not a target for object bugs.
    bool boundary = false;

    friend bool operator==(const SceneObject&, const SceneObject&) = default;

    std::vector<Vec3> world_vertices() const {
        std::vector<Vec3> out;
        out.reserve(mesh.vertices.size());
        for (const auto& v : mesh.vertices) out.push_back(transform.apply(v));
        return out;
    }
    Aabb world_bounds() const {
        Aabb box;
        for (const auto& v : mesh.vertices) box.extend(transform.apply(v));
        return box;
    }
};

struct Pose {
    Vec3 position;
    double yaw = 0.0;  // radians, [0, 2pi)

    friend bool operator==(const Pose&, const Pose&) = default;
};

/// Axis-aligned rectangle on the floor plane (x/z).
struct FloorRect {
    double min_x = 0, min_z = 0, max_x = 0, max_z = 0;

    bool contains(double x, double z) const { return x >= min_x && x <= max_x && z >= min_z && z <= max_z; }
    friend bool operator==(const FloorRect&, const FloorRect&) = default;
};

struct Floor {
    double height = 0.0;
    std::string object_id = "floor";
    FloorRect extent;
    /// Patches where the floor has no collision.
    std::vector<FloorRect> holes;

    bool supports(double x, double z) const {
        if (!extent.contains(x, z)) return false;
        return std::none_of(holes.begin(), holes.end(), [&](const FloorRect& h) { return h.contains(x, z); });
    }
    friend bool operator==(const Floor&, const Floor&) = default;
};

/// Vertical gradient sky: horizon colour at elevation 0 to zenith colour overhead;
/// below the horizon a fixed ground-haze colour.
struct Skybox {
    Rgb horizon{176, 214, 240};
    Rgb zenith{40, 80, 170};
    Rgb below{110, 120, 135};

    Rgb color(Vec3 dir) const {
        const double len = length(dir);
        const double s = len > 0 ? dir.y / len : 0.0;
        if (s < 0.0) return below;
        const double t = std::min(1.0, s);
        auto lerp = [t](std::uint8_t a, std::uint8_t b) {
            return static_cast<std::uint8_t>(std::lround(a + (double(b) - a) * t));
        };
        return {lerp(horizon.r, zenith.r), lerp(horizon.g, zenith.g), lerp(horizon.b, zenith.b)};
    }
    friend bool operator==(const Skybox&, const Skybox&) = default;
};

struct AgentBody {
    double radius = 0.3;
    double height = 1.2;
    double eye_height = 1.0;
    friend bool operator==(const AgentBody&, const AgentBody&) = default;
};

struct World {
    std::vector<SceneObject> objects;
    Floor floor;
    double nav_cell_size = 0.5;
    NavGrid walkable_grid;
    Skybox skybox;
    AgentBody agent_body;
    Pose agent_pose;

    friend bool operator==(const World&, const World&) = default;

    double floor_height() const { return floor.height; }

    const SceneObject* find(const std::string& id) const {
        for (const auto& o : objects)
            if (o.id == id) return &o;
        return nullptr;
    }
    SceneObject* find(const std::string& id) {
        for (auto& o : objects)
            if (o.id == id) return &o;
        return nullptr;
    }
    const SceneObject& at(const std::string& id) const {
        if (const auto* o = find(id)) return *o;
        throw ConfigError("unknown object id '" + id + "'");
    }
};

/// True if a vertical cylinder footprint (circle of radius r at x/z, spanning
/// [y0, y1]) overlaps the box.
inline bool cylinder_hits_box(double x, double z, double r, double y0, double y1, const Aabb& box) {
    if (y1 <= box.lo.y || y0 >= box.hi.y) return false;
    const double cx = std::clamp(x, box.lo.x, box.hi.x);
    const double cz = std::clamp(z, box.lo.z, box.hi.z);
    const double dx = x - cx, dz = z - cz;
    return dx * dx + dz * dz < r * r;
}

/// Objects other than the floor whose collision volume the agent body would
/// overlap at floor position (x, z) with feet at y.
inline std::vector<std::size_t> colliding_objects(const World& world, double x, double z, double feet_y) {
    std::vector<std::size_t> hits;
    const auto& body = world.agent_body;
    for (std::size_t i = 0; i < world.objects.size(); ++i) {
        const auto& o = world.objects[i];
        if (!o.collidable || o.id == world.floor.object_id) continue;
        // Slightly lift the feet so resting on the floor is not a collision.
        if (cylinder_hits_box(x, z, body.radius, feet_y + 1e-3, feet_y + body.height, o.world_bounds()))
            hits.push_back(i);
    }
    return hits;
}

/// Rebuilds the walkable grid from the collidable objects: a cell is walkable
/// when its centre is supported by the floor extent and an agent standing there
/// touches no collision volume.
inline NavGrid build_nav_grid(const World& world) {
    const auto& e = world.floor.extent;
    const double cs = world.nav_cell_size;
    const int cols = std::max(1, int(std::floor((e.max_x - e.min_x) / cs + 1e-9)));
    const int rows = std::max(1, int(std::floor((e.max_z - e.min_z) / cs + 1e-9)));
    NavGrid grid(cs, e.min_x, e.min_z, cols, rows);
    std::vector<Aabb> boxes;
    for (const auto& o : world.objects)
        if (o.collidable && o.id != world.floor.object_id) boxes.push_back(o.world_bounds());
    const auto& body = world.agent_body;
    const double y0 = world.floor.height + 1e-3;
    const double y1 = world.floor.height + body.height;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const Vec2 p = grid.center({c, r});
            bool ok = e.contains(p.x, p.y);
            for (const auto& b : boxes) {
                if (!ok) break;
                if (cylinder_hits_box(p.x, p.y, body.radius, y0, y1, b)) ok = false;
            }
            grid.set_walkable({c, r}, ok);
        }
    }
    return grid;
}

/// Checks every World invariant; throws ConfigError naming the violation.
inline void validate_world(const World& world) {
    std::unordered_set<std::string> ids;
    for (const auto& o : world.objects) {
        if (o.id.empty()) throw ConfigError("object with empty id");
        if (!ids.insert(o.id).second) throw ConfigError("duplicate object id '" + o.id + "'");
        o.mesh.validate("object '" + o.id + "'");
        if (o.texture.image && !o.texture.image->valid())
            throw ConfigError("object '" + o.id + "': texture size does not match its pixel data");
        for (double v : o.uv_transform.m)
            if (!std::isfinite(v)) throw ConfigError("object '" + o.id + "': non-finite uv transform");
    }
    if (!world.find(world.floor.object_id))
        throw ConfigError("floor object '" + world.floor.object_id + "' not found");
    if (world.nav_cell_size <= 0) throw ConfigError("nav.cell_size must be positive");
    if (world.walkable_grid.walkable_count() == 0) throw ConfigError("nav grid has no walkable cell");
    if (world.agent_body.radius <= 0 || world.agent_body.height <= 0)
        throw ConfigError("agent body dimensions must be positive");
}

/// Sets (or with nullopt clears) the bug tag of one object. Idempotent.
inline World assign_tag(World world, const std::string& object_id, std::optional<BugTag> tag) {
    auto* obj = world.find(object_id);
    if (!obj) throw ConfigError("assign_tag: unknown object id '" + object_id + "'");
    obj->bug_tag = tag;
    return world;
}

}  // namespace wob
