#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "wob/core/error.hpp"
#include "wob/core/image.hpp"
#include "wob/core/rng.hpp"
#include "wob/scene/primitives.hpp"
#include "wob/scene/types.hpp"

namespace wob {

namespace scene_detail {

using nlohmann::json;

inline const json& require(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
    return j.at(key);
}

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

inline Vec3 vec3(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected an array of 3 numbers");
    return {number(j[0], where), number(j[1], where), number(j[2], where)};
}

inline Vec2 vec2(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(where + ": expected an array of 2 numbers");
    return {number(j[0], where), number(j[1], where)};
}

inline Rgb rgb(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected [r, g, b]");
    Rgb c;
    std::uint8_t* ch[3] = {&c.r, &c.g, &c.b};
    for (int i = 0; i < 3; ++i) {
        if (!j[i].is_number_integer() || j[i].get<int>() < 0 || j[i].get<int>() > 255)
            throw ConfigError(where + ": colour channels must be integers in [0, 255]");
        *ch[i] = static_cast<std::uint8_t>(j[i].get<int>());
    }
    return c;
}

inline json to_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }
inline json to_json(Vec2 v) { return json::array({v.x, v.y}); }
inline json to_json(Rgb c) { return json::array({c.r, c.g, c.b}); }

inline double yaw_field(const json& j, const std::string& where) {
    if (j.contains("yaw")) return number(j.at("yaw"), where + ".yaw");
    if (j.contains("yaw_deg")) return deg2rad(number(j.at("yaw_deg"), where + ".yaw_deg"));
    return 0.0;
}

/// Loads textures once per path.
class TextureCache {
public:
    explicit TextureCache(std::filesystem::path base) : base_(std::move(base)) {}

    TextureRef load(const json& j, const std::string& where) {
        if (j.is_null()) return {};
        if (!j.is_string()) throw ConfigError(where + ": texture must be a path or null");
        auto p = std::filesystem::path(j.get<std::string>());
        if (p.is_relative()) p = base_ / p;
        const std::string key = std::filesystem::weakly_canonical(p).string();
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            auto img = std::make_shared<const RgbImage>(read_ppm(key));
            it = cache_.emplace(key, std::move(img)).first;
        }
        return {key, it->second};
    }

private:
    std::filesystem::path base_;
    std::map<std::string, std::shared_ptr<const RgbImage>> cache_;
};

inline Mesh parse_mesh(const json& j, const std::string& where) {
    Mesh m;
    const auto& verts = require(j, "vertices", where);
    const auto& tris = require(j, "triangles", where);
    if (!verts.is_array() || !tris.is_array()) throw ConfigError(where + ": vertices/triangles must be arrays");
    for (std::size_t i = 0; i < verts.size(); ++i)
        m.vertices.push_back(vec3(verts[i], where + ".vertices[" + std::to_string(i) + "]"));
    if (j.contains("normals")) {
        const auto& ns = j.at("normals");
        for (std::size_t i = 0; i < ns.size(); ++i)
            m.normals.push_back(vec3(ns[i], where + ".normals[" + std::to_string(i) + "]"));
    }
    if (j.contains("uvs")) {
        const auto& us = j.at("uvs");
        for (std::size_t i = 0; i < us.size(); ++i) m.uvs.push_back(vec2(us[i], where + ".uvs[" + std::to_string(i) + "]"));
    } else {
        m.uvs.assign(m.vertices.size(), Vec2{});
    }
    for (std::size_t i = 0; i < tris.size(); ++i) {
        const auto& t = tris[i];
        const std::string w = where + ".triangles[" + std::to_string(i) + "]";
        if (!t.is_array() || t.size() != 3) throw ConfigError(w + ": expected 3 indices");
        Triangle tri{};
        for (int k = 0; k < 3; ++k) {
            if (!t[k].is_number_integer() || t[k].get<long long>() < 0) throw ConfigError(w + ": indices must be non-negative integers");
            tri[k] = static_cast<std::uint32_t>(t[k].get<long long>());
        }
        m.triangles.push_back(tri);
    }
    if (!j.contains("normals")) {
        // Flat normals from the first triangle touching each vertex.
        m.normals.assign(m.vertices.size(), Vec3{0, 1, 0});
        for (const auto& t : m.triangles) {
            if (t[0] >= m.vertices.size() || t[1] >= m.vertices.size() || t[2] >= m.vertices.size()) continue;
            const Vec3 n = normalize(cross(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]));
            if (length(n) > 0.5)
                for (auto i : t) m.normals[i] = n;
        }
    }
    return m;
}

inline Mesh parse_primitive(const json& j, const std::string& where) {
    const auto& type = require(j, "type", where);
    if (!type.is_string()) throw ConfigError(where + ".type: expected a string");
    const std::string t = type.get<std::string>();
    if (t == "box") {
        const Vec3 s = vec3(require(j, "size", where), where + ".size");
        if (s.x <= 0 || s.y <= 0 || s.z <= 0) throw ConfigError(where + ".size: must be positive");
        return primitives::box(s.x, s.y, s.z);
    }
    if (t == "plane") {
        const Vec2 s = vec2(require(j, "size", where), where + ".size");
        if (s.x <= 0 || s.y <= 0) throw ConfigError(where + ".size: must be positive");
        return primitives::plane(s.x, s.y);
    }
    if (t == "ramp") {
        const Vec3 s = vec3(require(j, "size", where), where + ".size");
        if (s.x <= 0 || s.y <= 0 || s.z <= 0) throw ConfigError(where + ".size: must be positive");
        return primitives::ramp(s.x, s.y, s.z);
    }
    throw ConfigError(where + ".type: unknown primitive '" + t + "'");
}

inline UvTransform parse_uv(const json& j, const std::string& where) {
    UvTransform uv;
    if (j.is_array() && j.size() == 6) {
        for (int i = 0; i < 6; ++i) uv.m[i] = number(j[i], where);
    } else if (j.is_array() && j.size() == 2) {
        uv = UvTransform::scale(number(j[0], where), number(j[1], where));
    } else {
        throw ConfigError(where + ": expected [a,b,c,d,e,f] or [su, sv]");
    }
    return uv;
}

inline Transform parse_transform(const json& j, const std::string& where) {
    Transform t;
    if (j.contains("position")) t.position = vec3(j.at("position"), where + ".position");
    t.yaw = yaw_field(j, where);
    if (j.contains("scale")) t.scale = vec3(j.at("scale"), where + ".scale");
    return t;
}

inline SceneObject parse_object(const json& j, std::size_t index, TextureCache& textures) {
    const std::string where = "objects[" + std::to_string(index) + "]";
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    SceneObject o;
    const auto& id = require(j, "id", where);
    if (!id.is_string()) throw ConfigError(where + ".id: expected a string");
    o.id = id.get<std::string>();
    if (j.contains("primitive") == j.contains("mesh"))
        throw ConfigError(where + ": exactly one of 'primitive' or 'mesh' is required");
    o.mesh = j.contains("primitive") ? parse_primitive(j.at("primitive"), where + ".primitive")
                                     : parse_mesh(j.at("mesh"), where + ".mesh");
    o.texture = textures.load(j.value("texture", json()), where + ".texture");
    if (j.contains("uv_transform")) o.uv_transform = parse_uv(j.at("uv_transform"), where + ".uv_transform");
    if (j.contains("transform")) o.transform = parse_transform(j.at("transform"), where + ".transform");
    if (j.contains("collidable")) {
        if (!j.at("collidable").is_boolean()) throw ConfigError(where + ".collidable: expected a boolean");
        o.collidable = j.at("collidable").get<bool>();
    }
    if (j.contains("boundary")) {
        if (!j.at("boundary").is_boolean()) throw ConfigError(where + ".boundary: expected a boolean");
        o.boundary = j.at("boundary").get<bool>();
    }
    if (j.contains("layer")) {
        if (!j.at("layer").is_number_integer()) throw ConfigError(where + ".layer: expected an integer");
        o.render_layer = j.at("layer").get<int>();
    }
    if (j.contains("tag") && !j.at("tag").is_null()) {
        if (!j.at("tag").is_string()) throw ConfigError(where + ".tag: expected a bug kind name");
        o.bug_tag = BugTag::of(bug_kind_or_throw(j.at("tag").get<std::string>()));
    }
    return o;
}

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(offset, text.size()); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

}  // namespace scene_detail

/// Parses a scene document. Relative texture paths resolve against base_dir.
inline World parse_scene(const std::string& text, const std::filesystem::path& base_dir,
                         const std::string& name = "scene") {
    using namespace scene_detail;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(name + ":" + std::to_string(line_of_offset(text, e.byte)) + ": JSON parse error: " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(name + ": top level must be an object");

    World w;
    TextureCache textures(base_dir);
    try {
        const auto& objs = doc.contains("objects") ? doc.at("objects") : json::array();
        if (!objs.is_array()) throw ConfigError("objects: expected an array");
        for (std::size_t i = 0; i < objs.size(); ++i) w.objects.push_back(parse_object(objs[i], i, textures));

        const auto& fl = require(doc, "floor", "scene");
        w.floor.height = fl.contains("height") ? number(fl.at("height"), "floor.height") : 0.0;
        if (fl.contains("object")) {
            w.floor.object_id = fl.at("object").get<std::string>();
            const auto& ext = require(fl, "extent", "floor");
            if (!ext.is_array() || ext.size() != 4) throw ConfigError("floor.extent: expected [min_x, min_z, max_x, max_z]");
            w.floor.extent = {number(ext[0], "floor.extent"), number(ext[1], "floor.extent"), number(ext[2], "floor.extent"),
                              number(ext[3], "floor.extent")};
        } else {
            const Vec2 size = vec2(require(fl, "size", "floor"), "floor.size");
            if (size.x <= 0 || size.y <= 0) throw ConfigError("floor.size: must be positive");
            SceneObject f;
            f.id = fl.value("id", std::string("floor"));
            f.mesh = primitives::plane(size.x, size.y);
            f.transform.position = {0, w.floor.height, 0};
            f.texture = textures.load(fl.value("texture", json()), "floor.texture");
            if (fl.contains("uv_transform")) f.uv_transform = parse_uv(fl.at("uv_transform"), "floor.uv_transform");
            w.floor.object_id = f.id;
            w.floor.extent = {-size.x / 2, -size.y / 2, size.x / 2, size.y / 2};
            w.objects.insert(w.objects.begin(), std::move(f));
        }
        if (fl.contains("holes")) {
            for (const auto& h : fl.at("holes")) {
                if (!h.is_array() || h.size() != 4) throw ConfigError("floor.holes: expected [min_x, min_z, max_x, max_z]");
                w.floor.holes.push_back({h[0].get<double>(), h[1].get<double>(), h[2].get<double>(), h[3].get<double>()});
            }
        }

        if (doc.contains("nav")) {
            const auto& nav = doc.at("nav");
            if (nav.contains("cell_size")) w.nav_cell_size = number(nav.at("cell_size"), "nav.cell_size");
        }
        if (doc.contains("skybox")) {
            const auto& sky = doc.at("skybox");
            if (sky.contains("horizon")) w.skybox.horizon = rgb(sky.at("horizon"), "skybox.horizon");
            if (sky.contains("zenith")) w.skybox.zenith = rgb(sky.at("zenith"), "skybox.zenith");
            if (sky.contains("below")) w.skybox.below = rgb(sky.at("below"), "skybox.below");
        }
        if (doc.contains("agent")) {
            const auto& ag = doc.at("agent");
            if (ag.contains("position")) w.agent_pose.position = vec3(ag.at("position"), "agent.position");
            w.agent_pose.yaw = wrap_angle(yaw_field(ag, "agent"));
            if (ag.contains("radius")) w.agent_body.radius = number(ag.at("radius"), "agent.radius");
            if (ag.contains("height")) w.agent_body.height = number(ag.at("height"), "agent.height");
            if (ag.contains("eye_height")) w.agent_body.eye_height = number(ag.at("eye_height"), "agent.eye_height");
        }
    } catch (const ConfigError& e) {
        throw ConfigError(name + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(name + ": " + e.what());
    }

    if (w.nav_cell_size <= 0) throw ConfigError(name + ": nav.cell_size must be positive");
    for (const auto& o : w.objects) o.mesh.validate(name + ": object '" + o.id + "'");
    w.walkable_grid = build_nav_grid(w);
    try {
        validate_world(w);
    } catch (const ConfigError& e) {
        throw ConfigError(name + ": " + e.what());
    }
    return w;
}

inline World load_scene(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scene file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scene(ss.str(), path.parent_path(), path.string());
}

/// Serializes a world with explicit meshes. Texture paths are written relative
/// to relative_to when given.
inline nlohmann::json scene_to_json(const World& w, const std::filesystem::path& relative_to = {}) {
    using nlohmann::json;
    using scene_detail::to_json;
    json objs = json::array();
    for (const auto& o : w.objects) {
        json mesh;
        json verts = json::array(), norms = json::array(), uvs = json::array(), tris = json::array();
        for (const auto& v : o.mesh.vertices) verts.push_back(to_json(v));
        for (const auto& n : o.mesh.normals) norms.push_back(to_json(n));
        for (const auto& uv : o.mesh.uvs) uvs.push_back(to_json(uv));
        for (const auto& t : o.mesh.triangles) tris.push_back(json::array({t[0], t[1], t[2]}));
        mesh["vertices"] = std::move(verts);
        mesh["normals"] = std::move(norms);
        mesh["uvs"] = std::move(uvs);
        mesh["triangles"] = std::move(tris);
        json jo;
        jo["id"] = o.id;
        jo["mesh"] = std::move(mesh);
        if (o.texture.missing()) {
            jo["texture"] = nullptr;
        } else if (!relative_to.empty()) {
            jo["texture"] = std::filesystem::relative(o.texture.path, relative_to).generic_string();
        } else {
            jo["texture"] = o.texture.path;
        }
        jo["uv_transform"] = json::array();
        for (double v : o.uv_transform.m) jo["uv_transform"].push_back(v);
        jo["transform"] = {{"position", to_json(o.transform.position)},
                           {"yaw", o.transform.yaw},
                           {"scale", to_json(o.transform.scale)}};
        jo["collidable"] = o.collidable;
        jo["layer"] = o.render_layer;
        if (o.boundary) jo["boundary"] = true;
        if (o.bug_tag) jo["tag"] = std::string(to_string(o.bug_tag->kind));
        objs.push_back(std::move(jo));
    }
    json holes = json::array();
    for (const auto& h : w.floor.holes) holes.push_back({h.min_x, h.min_z, h.max_x, h.max_z});
    const auto& e = w.floor.extent;
    json doc;
    doc["objects"] = std::move(objs);
    doc["floor"] = {{"object", w.floor.object_id},
                    {"height", w.floor.height},
                    {"extent", {e.min_x, e.min_z, e.max_x, e.max_z}},
                    {"holes", std::move(holes)}};
    doc["nav"] = {{"cell_size", w.nav_cell_size}};
    doc["skybox"] = {{"horizon", to_json(w.skybox.horizon)},
                     {"zenith", to_json(w.skybox.zenith)},
                     {"below", to_json(w.skybox.below)}};
    doc["agent"] = {{"position", to_json(w.agent_pose.position)},
                    {"yaw", w.agent_pose.yaw},
                    {"radius", w.agent_body.radius},
                    {"height", w.agent_body.height},
                    {"eye_height", w.agent_body.eye_height}};
    return doc;
}

inline void save_scene(const World& w, const std::filesystem::path& path) {
    auto dir = path.parent_path();
    if (dir.empty()) dir = ".";
    const auto doc = scene_to_json(w, std::filesystem::weakly_canonical(dir));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write scene file " + path.string());
    out << doc.dump(1) << '\n';
}

/// Content hash of a world, independent of where its textures live on disk.
inline std::string scene_hash(const World& w) {
    auto doc = scene_to_json(w);
    for (std::size_t i = 0; i < w.objects.size(); ++i) {
        const auto& t = w.objects[i].texture;
        if (t.missing()) continue;
        const auto h = fnv1a(t.image->pixels.data(), t.image->pixels.size());
        doc["objects"][i]["texture"] = std::to_string(t.image->width) + "x" + std::to_string(t.image->height) + ":" +
                                       std::to_string(h);
    }
    const std::string s = doc.dump();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(s.data(), s.size())));
    return buf;
}

}  // namespace wob
