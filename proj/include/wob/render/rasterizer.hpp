#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "wob/core/math.hpp"
#include "wob/render/camera.hpp"

namespace wob::raster {

/// Sub-pixel precision of snapped screen coordinates (1/16 pixel).
inline constexpr int kSubpixelBits = 4;
inline constexpr std::int64_t kSubpixel = 1 << kSubpixelBits;
inline constexpr std::int64_t kHalfPixel = kSubpixel / 2;

/// Vertex after the view transform.
struct ViewVertex {
    Vec3 pos;  // view space; z is depth
    Vec2 uv;
};

struct Fragment {
    int x = 0;
    int y = 0;
    double depth = 0;
    Vec2 uv;
    bool back_face = false;
};

enum class Cull { None, Back };

namespace detail {

inline ViewVertex lerp(const ViewVertex& a, const ViewVertex& b, double t) {
    return {a.pos + (b.pos - a.pos) * t, a.uv + (b.uv - a.uv) * t};
}

/// Sutherland-Hodgman against the plane z = plane; keep_greater selects the side.
inline void clip_z(std::vector<ViewVertex>& poly, double plane, bool keep_greater) {
    if (poly.empty()) return;
    std::vector<ViewVertex> out;
    out.reserve(poly.size() + 2);
    auto inside = [&](const ViewVertex& v) { return keep_greater ? v.pos.z >= plane : v.pos.z <= plane; };
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        const bool ia = inside(a), ib = inside(b);
        if (ia) out.push_back(a);
        if (ia != ib) {
            const double t = (plane - a.pos.z) / (b.pos.z - a.pos.z);
            auto v = lerp(a, b, t);
            v.pos.z = plane;
            out.push_back(v);
        }
    }
    poly.swap(out);
}

struct ScreenVertex {
    std::int64_t x = 0;  // fixed point
    std::int64_t y = 0;
    double inv_z = 0;
    Vec2 uv_over_z;
};

inline std::int64_t edge(const ScreenVertex& a, const ScreenVertex& b, std::int64_t px, std::int64_t py) {
    return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

/// Top-left fill convention for triangles with positive signed area
/// (clockwise on a y-down screen).
inline bool is_top_left(const ScreenVertex& a, const ScreenVertex& b) {
    const std::int64_t dx = b.x - a.x, dy = b.y - a.y;
    return (dy == 0 && dx > 0) || dy < 0;
}

// Coordinates beyond this many pixels are outside any sensible guard band.
inline constexpr double kGuardBand = 1.0e6;

inline std::int64_t snap(double v) {
    return static_cast<std::int64_t>(std::llround(std::clamp(v, -kGuardBand, kGuardBand) * double(kSubpixel)));
}

}  // namespace detail

/// Rasterizes one view-space triangle (counter-clockwise front face). The
/// polygon is clipped to [near, far] in depth, projected, snapped to fixed
/// point and scan-converted with integer edge functions. Depth and uv are
/// interpolated perspective-correctly. Degenerate triangles produce nothing.
template <typename OnFragment>
void rasterize_triangle(const Camera& cam, double near_plane, const std::array<ViewVertex, 3>& tri, Cull cull,
                        OnFragment&& on_fragment) {
    std::vector<ViewVertex> poly(tri.begin(), tri.end());
    detail::clip_z(poly, near_plane, true);
    detail::clip_z(poly, cam.far_plane, false);
    if (poly.size() < 3) return;

    std::vector<detail::ScreenVertex> sv;
    sv.reserve(poly.size());
    for (const auto& v : poly) {
        const Vec2 s = cam.view_to_screen(v.pos);
        const double iz = 1.0 / v.pos.z;
        sv.push_back({detail::snap(s.x), detail::snap(s.y), iz, v.uv * iz});
    }

    const std::int64_t max_x = std::int64_t(cam.width) - 1;
    const std::int64_t max_y = std::int64_t(cam.height) - 1;

    for (std::size_t k = 1; k + 1 < sv.size(); ++k) {
        detail::ScreenVertex v0 = sv[0], v1 = sv[k], v2 = sv[k + 1];
        std::int64_t area = detail::edge(v0, v1, v2.x, v2.y);
        if (area == 0) continue;
        // Counter-clockwise in the world appears with negative area on a y-down screen.
        const bool back = area > 0;
        if (back && cull == Cull::Back) continue;
        if (area < 0) {
            std::swap(v1, v2);
            area = -area;
        }

        const std::int64_t bx0 = std::min({v0.x, v1.x, v2.x}), bx1 = std::max({v0.x, v1.x, v2.x});
        const std::int64_t by0 = std::min({v0.y, v1.y, v2.y}), by1 = std::max({v0.y, v1.y, v2.y});
        auto first_px = [](std::int64_t lo) {
            // Smallest pixel whose centre (p*16 + 8) is >= lo.
            const std::int64_t n = lo - kHalfPixel;
            return n >= 0 ? (n + kSubpixel - 1) / kSubpixel : -((-n) / kSubpixel);
        };
        auto last_px = [](std::int64_t hi) {
            const std::int64_t n = hi - kHalfPixel;
            return n >= 0 ? n / kSubpixel : -((-n + kSubpixel - 1) / kSubpixel);
        };
        const std::int64_t x0 = std::max<std::int64_t>(0, first_px(bx0));
        const std::int64_t x1 = std::min<std::int64_t>(max_x, last_px(bx1));
        const std::int64_t y0 = std::max<std::int64_t>(0, first_px(by0));
        const std::int64_t y1 = std::min<std::int64_t>(max_y, last_px(by1));
        if (x0 > x1 || y0 > y1) continue;

        const bool tl0 = detail::is_top_left(v1, v2);
        const bool tl1 = detail::is_top_left(v2, v0);
        const bool tl2 = detail::is_top_left(v0, v1);
        const double inv_area = 1.0 / double(area);

        for (std::int64_t py = y0; py <= y1; ++py) {
            const std::int64_t cy = py * kSubpixel + kHalfPixel;
            for (std::int64_t px = x0; px <= x1; ++px) {
                const std::int64_t cx = px * kSubpixel + kHalfPixel;
                const std::int64_t w0 = detail::edge(v1, v2, cx, cy);
                const std::int64_t w1 = detail::edge(v2, v0, cx, cy);
                const std::int64_t w2 = detail::edge(v0, v1, cx, cy);
                if (w0 < 0 || w1 < 0 || w2 < 0) continue;
                if ((w0 == 0 && !tl0) || (w1 == 0 && !tl1) || (w2 == 0 && !tl2)) continue;
                const double b0 = double(w0) * inv_area, b1 = double(w1) * inv_area, b2 = double(w2) * inv_area;
                const double iz = b0 * v0.inv_z + b1 * v1.inv_z + b2 * v2.inv_z;
                if (!(iz > 0.0)) continue;
                Fragment f;
                f.x = int(px);
                f.y = int(py);
                f.depth = std::clamp(1.0 / iz, near_plane, cam.far_plane);
                const Vec2 uvz = v0.uv_over_z * b0 + v1.uv_over_z * b1 + v2.uv_over_z * b2;
                f.uv = uvz * (1.0 / iz);
                f.back_face = back;
                on_fragment(f);
            }
        }
    }
}

}  // namespace wob::raster
