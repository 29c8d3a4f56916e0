#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <utility>
#include <vector>

#include "wob/bugs/kinds.hpp"
#include "wob/bugs/state.hpp"
#include "wob/core/image.hpp"
#include "wob/core/rng.hpp"
#include "wob/render/camera.hpp"
#include "wob/render/rasterizer.hpp"
#include "wob/scene/types.hpp"

namespace wob {

struct RenderOptions {
    bool lambert = true;
    Vec3 light_dir = normalize(Vec3{0.4, 1.0, 0.25});
    double ambient = 0.55;
    /// Fragments closer than this in view depth are a depth tie.
    double ztie_epsilon = 1e-5;
    /// In the mask pass a back face must beat a front face by this fraction of
    /// depth; front faces win anything closer.
    double backface_bias = 1e-3;
};

/// Frames previously shown on screen, oldest first.
class FrameHistory {
public:
    explicit FrameHistory(std::size_t capacity = 8) : capacity_(std::max<std::size_t>(1, capacity)) {}

    void push(Frame f) {
        frames_.push_back(std::move(f));
        while (frames_.size() > capacity_) frames_.pop_front();
    }
    /// Frame shown k steps ago (k >= 1), or nullptr.
    const Frame* ago(int k) const {
        if (k < 1 || std::size_t(k) > frames_.size()) return nullptr;
        return &frames_[frames_.size() - std::size_t(k)];
    }
    void clear() { frames_.clear(); }
    std::size_t size() const { return frames_.size(); }

private:
    std::size_t capacity_;
    std::deque<Frame> frames_;
};

namespace render_detail {

inline Rgb sample_texture(const TextureRef& tex, const UvTransform& uvt, Vec2 uv) {
    if (tex.missing()) return kMissingTextureColor;
    const RgbImage& img = *tex.image;
    const Vec2 t = uvt.apply(uv);
    const double fu = std::floor(t.x * img.width);
    const double fv = std::floor(t.y * img.height);
    if (!std::isfinite(fu) || !std::isfinite(fv)) return kMissingTextureColor;
    auto wrap = [](double v, int n) {
        const double m = std::fmod(v, double(n));
        int i = int(m < 0 ? m + n : m);
        return i >= n ? 0 : i;
    };
    const int x = wrap(fu, img.width);
    const int y = img.height - 1 - wrap(fv, img.height);
    return img.at(x, y);
}

inline Rgb shade(Rgb c, double k) {
    auto ch = [k](std::uint8_t v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v * k), 0L, 255L)); };
    return {ch(c.r), ch(c.g), ch(c.b)};
}

/// Per-object triangles in view space together with their world normals.
struct PreparedObject {
    std::vector<std::array<raster::ViewVertex, 3>> triangles;
    std::vector<double> shading;
};

inline PreparedObject prepare(const SceneObject& obj, const Camera& cam, const RenderOptions& opt) {
    PreparedObject out;
    const auto world = obj.world_vertices();
    std::vector<Vec3> view(world.size());
    for (std::size_t i = 0; i < world.size(); ++i) view[i] = cam.to_view(world[i]);
    out.triangles.reserve(obj.mesh.triangles.size());
    out.shading.reserve(obj.mesh.triangles.size());
    for (const auto& t : obj.mesh.triangles) {
        std::array<raster::ViewVertex, 3> tri;
        for (int k = 0; k < 3; ++k) tri[k] = {view[t[k]], obj.mesh.uvs[t[k]]};
        out.triangles.push_back(tri);
        double s = 1.0;
        if (opt.lambert) {
            const Vec3 n = normalize(cross(world[t[1]] - world[t[0]], world[t[2]] - world[t[0]]));
            s = opt.ambient + (1.0 - opt.ambient) * std::max(0.0, dot(n, opt.light_dir));
        }
        out.shading.push_back(s);
    }
    return out;
}

inline bool tie_winner(std::uint64_t seed, int x, int y, std::uint64_t frame_index) {
    return (hash_combine(seed, std::uint64_t(x), std::uint64_t(y), frame_index) & 1ULL) != 0;
}

inline std::vector<std::size_t> layered_order(const World& w) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < w.objects.size(); ++i)
        if (w.objects[i].render_layer > 0) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return w.objects[a].render_layer < w.objects[b].render_layer; });
    return idx;
}

inline double effective_near(const Camera& cam, const BugState& state) {
    return state.near_plane_override.value_or(cam.near_plane);
}

}  // namespace render_detail

/// Main-camera observation: sky, depth-tested textured base layer, later
/// layers drawn over it without the base depth, then screen tear and black
/// screen. Screen tear needs `history` to hold the frame `lag` steps back and is
/// skipped otherwise.
inline Frame render_observation(const World& base_world, const Camera& camera, const BugState& state,
                                std::uint64_t frame_index, std::uint64_t seed, const FrameHistory* history = nullptr,
                                const RenderOptions& opt = {}) {
    using namespace render_detail;
    camera.validate();
    const World& w = state.world(base_world);
    const int W = camera.width, H = camera.height;
    const double near_plane = effective_near(camera, state);

    Frame frame(W, H);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) frame.set(x, y, w.skybox.color(camera.ray_direction(x + 0.5, y + 0.5)));

    std::vector<double> depth(std::size_t(W) * H);
    std::vector<std::uint8_t> covered(std::size_t(W) * H);

    auto draw = [&](const SceneObject& obj) {
        const auto prep = prepare(obj, camera, opt);
        for (std::size_t t = 0; t < prep.triangles.size(); ++t) {
            const double s = prep.shading[t];
            raster::rasterize_triangle(camera, near_plane, prep.triangles[t], raster::Cull::Back,
                                       [&](const raster::Fragment& f) {
                                           const std::size_t i = std::size_t(f.y) * W + f.x;
                                           bool write = !covered[i] || f.depth < depth[i] - opt.ztie_epsilon;
                                           if (!write && std::abs(f.depth - depth[i]) < opt.ztie_epsilon)
                                               write = tie_winner(seed, f.x, f.y, frame_index);
                                           if (!write) return;
                                           covered[i] = 1;
                                           depth[i] = f.depth;
                                           frame.set(f.x, f.y, shade(sample_texture(obj.texture, obj.uv_transform, f.uv), s));
                                       });
        }
    };

    for (const auto& obj : w.objects)
        if (obj.render_layer <= 0) draw(obj);

    const auto layered = layered_order(w);
    for (std::size_t k = 0; k < layered.size(); ++k) {
        if (k == 0 || w.objects[layered[k]].render_layer != w.objects[layered[k - 1]].render_layer)
            std::fill(covered.begin(), covered.end(), 0);
        draw(w.objects[layered[k]]);
    }

    if (const auto& tear = state.frame_effects.tear) {
        if (const Frame* stale = history ? history->ago(tear->lag) : nullptr;
            stale && stale->width == W && stale->height == H) {
            for (int y = std::max(0, tear->row); y < H; ++y)
                for (int x = 0; x < W; ++x) frame.set(x, y, stale->at(x, y));
        }
    }
    if (state.frame_effects.black_screen) frame.fill(kBlack);
    return frame;
}

/// Bug-mask camera: tagged objects in their tag colour, visible back faces in
/// a clipping tag, sky below the floor in the boundary-hole tag, then
/// post-processing bugs stamped over everything.
inline MaskFrame render_mask(const World& base_world, const Camera& camera, const BugState& state,
                             std::uint64_t frame_index, std::uint64_t seed, const RenderOptions& opt = {}) {
    using namespace render_detail;
    camera.validate();
    const World& w = state.world(base_world);
    const int W = camera.width, H = camera.height;
    const std::size_t N = std::size_t(W) * H;
    const double near_plane = effective_near(camera, state);

    std::vector<double> depth(N);
    std::vector<std::uint8_t> covered(N), back(N);
    std::vector<std::uint32_t> owner(N);

    for (std::size_t oi = 0; oi < w.objects.size(); ++oi) {
        const auto& obj = w.objects[oi];
        if (obj.render_layer > 0) continue;
        const auto prep = prepare(obj, camera, opt);
        for (const auto& tri : prep.triangles) {
            raster::rasterize_triangle(camera, near_plane, tri, raster::Cull::None, [&](const raster::Fragment& f) {
                const std::size_t i = std::size_t(f.y) * W + f.x;
                bool write;
                if (!covered[i]) {
                    write = true;
                } else if (bool(back[i]) == f.back_face) {
                    write = f.depth < depth[i] - opt.ztie_epsilon;
                    if (!write && std::abs(f.depth - depth[i]) < opt.ztie_epsilon)
                        write = tie_winner(seed, f.x, f.y, frame_index);
                } else if (f.back_face) {
                    write = f.depth < depth[i] * (1.0 - opt.backface_bias);
                } else {
                    write = f.depth < depth[i] * (1.0 + opt.backface_bias);
                }
                if (!write) return;
                covered[i] = 1;
                depth[i] = f.depth;
                back[i] = f.back_face;
                owner[i] = std::uint32_t(oi);
            });
        }
    }

    MaskFrame mask(W, H);
    const Rgb hole = tag_color(BugKind::BoundaryHole);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const std::size_t i = std::size_t(y) * W + x;
            if (covered[i]) {
                const auto& obj = w.objects[owner[i]];
                if (obj.bug_tag) {
                    mask.set(x, y, obj.bug_tag->color);
                } else if (back[i]) {
                    const auto it = state.backface_kinds.find(obj.id);
                    mask.set(x, y, tag_color(it != state.backface_kinds.end() ? it->second : BugKind::CameraClipping));
                }
            } else {
                const Vec3 dir = camera.ray_direction(x + 0.5, y + 0.5);
                if (camera.pose.position.y + dir.y * camera.far_plane < w.floor.height) mask.set(x, y, hole);
            }
        }
    }

    // Geometry between the camera's own near plane and an overridden one was
    // culled; whatever shows through there is a clipping artifact.
    if (near_plane > camera.near_plane) {
        const Rgb clip = tag_color(BugKind::CameraClipping);
        for (const auto& obj : w.objects) {
            if (obj.render_layer > 0) continue;
            const auto prep = prepare(obj, camera, opt);
            for (const auto& tri : prep.triangles)
                raster::rasterize_triangle(camera, camera.near_plane, tri, raster::Cull::Back,
                                           [&](const raster::Fragment& f) {
                                               if (f.depth < near_plane) mask.set(f.x, f.y, clip);
                                           });
        }
    }

    const auto layered = layered_order(w);
    for (std::size_t k = 0; k < layered.size(); ++k) {
        if (k == 0 || w.objects[layered[k]].render_layer != w.objects[layered[k - 1]].render_layer)
            std::fill(covered.begin(), covered.end(), 0);
        const auto& obj = w.objects[layered[k]];
        const Rgb color = obj.bug_tag ? obj.bug_tag->color : kBlack;
        const auto prep = prepare(obj, camera, opt);
        for (const auto& tri : prep.triangles)
            raster::rasterize_triangle(camera, near_plane, tri, raster::Cull::Back, [&](const raster::Fragment& f) {
                const std::size_t i = std::size_t(f.y) * W + f.x;
                if (covered[i] && f.depth >= depth[i]) return;
                covered[i] = 1;
                depth[i] = f.depth;
                mask.set(f.x, f.y, color);
            });
    }

    if (const auto& tear = state.frame_effects.tear) {
        const Rgb c = tag_color(BugKind::ScreenTear);
        for (int y = std::max(0, tear->row); y < H; ++y)
            for (int x = 0; x < W; ++x) mask.set(x, y, c);
    }
    if (state.frame_effects.black_screen) mask.fill(tag_color(BugKind::BlackScreen));
    return mask;
}

/// Renders observation and mask together and keeps the display history that
/// screen tearing reads from. A tear whose stale frame is not yet available is
/// dropped from both outputs so they stay consistent.
class Screen {
public:
    explicit Screen(std::size_t history = 8, RenderOptions opt = {}) : history_(history), opt_(opt) {}

    std::pair<Frame, MaskFrame> present(const World& world, const Camera& camera, BugState state,
                                        std::uint64_t frame_index, std::uint64_t seed) {
        if (state.frame_effects.tear && !history_.ago(state.frame_effects.tear->lag)) state.frame_effects.tear.reset();
        Frame f = render_observation(world, camera, state, frame_index, seed, &history_, opt_);
        MaskFrame m = render_mask(world, camera, state, frame_index, seed, opt_);
        history_.push(f);
        return {std::move(f), std::move(m)};
    }

    const FrameHistory& history() const { return history_; }
    void reset() { history_.clear(); }

private:
    FrameHistory history_;
    RenderOptions opt_;
};

}  // namespace wob
