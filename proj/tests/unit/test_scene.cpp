#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "wob/scene/primitives.hpp"
#include "wob/scene/scene_io.hpp"

using namespace wob;
using Catch::Approx;

namespace {

const std::filesystem::path kData = WOB_DATA_DIR;

World default_world() { return load_scene(kData / "scenes" / "default.json"); }

std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("wob_scene_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::string error_of(const std::string& text) {
    try {
        parse_scene(text, kData / "scenes", "t.json");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

// Every face of a convex primitive must point away from its centroid.
void check_outward(const Mesh& m) {
    Vec3 c{};
    for (const auto& v : m.vertices) c = c + v;
    c = c * (1.0 / double(m.vertices.size()));
    for (const auto& t : m.triangles) {
        const Vec3 a = m.vertices[t[0]], b = m.vertices[t[1]], d = m.vertices[t[2]];
        const Vec3 n = cross(b - a, d - a);
        const Vec3 mid = (a + b + d) * (1.0 / 3.0);
        CHECK(dot(n, mid - c) > 0.0);
    }
}

}  // namespace

TEST_CASE("primitives are closed convex meshes with outward faces") {
    const auto b = primitives::box(2, 1, 3);
    CHECK(b.triangles.size() == 12);
    b.validate("box");
    check_outward(b);
    const auto r = primitives::ramp(3, 1, 2);
    r.validate("ramp");
    check_outward(r);
    const auto p = primitives::plane(4, 4);
    for (const auto& t : p.triangles) {
        const Vec3 n = cross(p.vertices[t[1]] - p.vertices[t[0]], p.vertices[t[2]] - p.vertices[t[0]]);
        CHECK(n.y > 0);
    }
    auto bounds = Aabb{};
    for (const auto& v : b.vertices) bounds.extend(v);
    CHECK(bounds.lo.y == Approx(0.0));
    CHECK(bounds.hi.y == Approx(1.0));
    CHECK(bounds.hi.z == Approx(1.5));
}

TEST_CASE("transform yaw matches the camera heading convention") {
    Transform t;
    t.yaw = deg2rad(90);
    const Vec3 p = t.apply({1, 0, 0});
    const Vec3 f = yaw_forward(t.yaw);
    CHECK(p.x == Approx(f.x).margin(1e-12));
    CHECK(p.z == Approx(f.z).margin(1e-12));
}

TEST_CASE("default scene loads and validates") {
    const World w = default_world();
    CHECK(w.floor.object_id == "floor");
    CHECK(w.objects.front().id == "floor");
    CHECK(w.find("crate_1") != nullptr);
    CHECK(w.at("wall_north").boundary);
    CHECK_FALSE(w.at("crate_1").boundary);
    for (const auto& o : w.objects) CHECK_FALSE(o.texture.missing());
    CHECK(w.walkable_grid.cols == 42);
    CHECK(w.walkable_grid.rows == 42);
    // Cells under a crate are blocked, the spawn cell is open.
    CHECK_FALSE(w.walkable_grid.is_walkable(w.walkable_grid.cell_of({-5.0, -5.0})));
    CHECK(w.walkable_grid.is_walkable(w.walkable_grid.cell_of({0.1, 0.1})));
    // Cells along the boundary walls are blocked.
    CHECK_FALSE(w.walkable_grid.is_walkable({0, 20}));
    const double frac = double(w.walkable_grid.walkable_count()) / (42.0 * 42.0);
    CHECK(frac > 0.6);
    CHECK(frac < 0.95);
}

TEST_CASE("walkable grid agrees with a direct collision query") {
    const World w = default_world();
    const auto& g = w.walkable_grid;
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) {
            const Vec2 p = g.center({c, r});
            const bool free = colliding_objects(w, p.x, p.y, w.floor.height).empty();
            CHECK(g.is_walkable({c, r}) == free);
        }
}

TEST_CASE("scene serialization round trips") {
    const World w = default_world();
    const auto dir = temp_dir("roundtrip");
    save_scene(w, dir / "copy.json");
    const World back = load_scene(dir / "copy.json");
    CHECK(back == w);
    CHECK(scene_hash(back) == scene_hash(w));

    World tagged = assign_tag(w, "crate_2", BugTag::of(BugKind::TextureMissing));
    CHECK(scene_hash(tagged) != scene_hash(w));
    CHECK(assign_tag(tagged, "crate_2", BugTag::of(BugKind::TextureMissing)) == tagged);
    CHECK(assign_tag(tagged, "crate_2", std::nullopt) == w);
    CHECK_THROWS_AS(assign_tag(w, "ghost", std::nullopt), ConfigError);
}

TEST_CASE("scene errors name the offending field") {
    const std::string floor = R"("floor": {"size": [4, 4]})";
    CHECK(error_of("{" + floor + R"(, "objects": [{"primitive": {"type": "box", "size": [1,1,1]}}]})")
              .find("objects[0]: missing field 'id'") != std::string::npos);
    CHECK(error_of("{" + floor + R"(, "objects": [{"id": "a", "primitive": {"type": "cone"}}]})")
              .find("unknown primitive 'cone'") != std::string::npos);
    CHECK(error_of("{" + floor + R"(, "objects": [{"id": "a", "primitive": {"type": "box", "size": [1,-1,1]}}]})")
              .find("objects[0].primitive.size") != std::string::npos);
    CHECK(error_of("{" + floor + R"(, "objects": [{"id": "floor", "primitive": {"type": "box", "size": [1,1,1]}}]})")
              .find("duplicate object id 'floor'") != std::string::npos);
    CHECK(error_of("{" + floor + R"(, "nav": {"cell_size": 0}})").find("cell_size") != std::string::npos);
    CHECK(error_of("{\n\"floor\": {\n\"size\": [4, 4]\n,}\n}").find("t.json:4") != std::string::npos);
    CHECK(error_of(R"({"objects": []})").find("missing field 'floor'") != std::string::npos);
    CHECK(error_of("{" + floor + R"(, "objects": [{"id": "a", "mesh": {"vertices": [[0,0,0],[1,0,0],[0,1,0]], "triangles": [[0,1,5]]}}]})")
              .find("out of range") != std::string::npos);
    // A missing texture file is an I/O problem rather than a config one.
    CHECK_THROWS_AS(parse_scene("{" + floor + R"(, "objects": [{"id": "a", "primitive": {"type": "box", "size": [1,1,1]}, "texture": "nope.ppm"}]})",
                                kData, "t.json"),
                    IoError);
    CHECK_THROWS_AS(load_scene(kData / "scenes" / "does_not_exist.json"), IoError);
}

TEST_CASE("explicit mesh objects and null textures parse") {
    const World w = parse_scene(R"({
        "floor": {"size": [6, 6]},
        "objects": [{"id": "tri", "mesh": {"vertices": [[0,0,0],[1,0,0],[0,1,0]], "triangles": [[0,1,2]]},
                     "texture": null, "transform": {"position": [1, 0, 1], "yaw_deg": 90}, "collidable": false,
                     "tag": "z_fighting"}]
    })",
                                kData, "inline");
    const auto& t = w.at("tri");
    CHECK(t.texture.missing());
    CHECK_FALSE(t.collidable);
    REQUIRE(t.bug_tag);
    CHECK(t.bug_tag->kind == BugKind::ZFighting);
    CHECK(t.transform.yaw == Approx(kPi / 2));
    CHECK(t.mesh.normals[0].z == Approx(1.0));
}

TEST_CASE("floor holes remove support") {
    World w = default_world();
    CHECK(w.floor.supports(0, 0));
    CHECK_FALSE(w.floor.supports(20, 0));
    w.floor.holes.push_back({-1, -1, 1, 1});
    CHECK_FALSE(w.floor.supports(0, 0));
    CHECK(w.floor.supports(1.5, 0));
}
