#pragma once

#include <cstdint>

#include "wob/core/math.hpp"
#include "wob/scene/types.hpp"

namespace wob::primitives {

namespace detail {

/// Appends a quad centred at c spanning +-u and +-v. Front face is u x v.
/// UVs are in metres along the face, starting at the (-u, -v) corner.
inline void add_quad(Mesh& m, Vec3 c, Vec3 u, Vec3 v) {
    const Vec3 n = normalize(cross(u, v));
    const auto base = static_cast<std::uint32_t>(m.vertices.size());
    const double lu = 2.0 * length(u), lv = 2.0 * length(v);
    const Vec3 corners[4] = {c - u - v, c + u - v, c + u + v, c - u + v};
    const Vec2 uvs[4] = {{0, 0}, {lu, 0}, {lu, lv}, {0, lv}};
    for (int i = 0; i < 4; ++i) {
        m.vertices.push_back(corners[i]);
        m.normals.push_back(n);
        m.uvs.push_back(uvs[i]);
    }
    m.triangles.push_back({base, base + 1, base + 2});
    m.triangles.push_back({base, base + 2, base + 3});
}

inline void add_triangle(Mesh& m, Vec3 a, Vec3 b, Vec3 c, Vec2 ua, Vec2 ub, Vec2 uc) {
    const Vec3 n = normalize(cross(b - a, c - a));
    const auto base = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.insert(m.vertices.end(), {a, b, c});
    m.normals.insert(m.normals.end(), {n, n, n});
    m.uvs.insert(m.uvs.end(), {ua, ub, uc});
    m.triangles.push_back({base, base + 1, base + 2});
}

}  // namespace detail

/// Axis-aligned box with its base centred on the origin (y from 0 to sy).
inline Mesh box(double sx, double sy, double sz) {
    Mesh m;
    const double hx = sx / 2, hy = sy / 2, hz = sz / 2;
    const Vec3 c{0, hy, 0};
    detail::add_quad(m, c + Vec3{hx, 0, 0}, {0, 0, -hz}, {0, hy, 0});   // +x
    detail::add_quad(m, c + Vec3{-hx, 0, 0}, {0, 0, hz}, {0, hy, 0});   // -x
    detail::add_quad(m, c + Vec3{0, 0, hz}, {hx, 0, 0}, {0, hy, 0});    // +z
    detail::add_quad(m, c + Vec3{0, 0, -hz}, {-hx, 0, 0}, {0, hy, 0});  // -z
    detail::add_quad(m, c + Vec3{0, hy, 0}, {hx, 0, 0}, {0, 0, -hz});   // +y
    detail::add_quad(m, c + Vec3{0, -hy, 0}, {hx, 0, 0}, {0, 0, hz});   // -y
    return m;
}

/// Horizontal plane at y = 0 facing up, centred on the origin.
inline Mesh plane(double sx, double sz) {
    Mesh m;
    detail::add_quad(m, {0, 0, 0}, {sx / 2, 0, 0}, {0, 0, -sz / 2});
    return m;
}

/// Wedge on an sx x sz base rising along +x to height h.
inline Mesh ramp(double sx, double h, double sz) {
    Mesh m;
    const double hx = sx / 2, hz = sz / 2;
    detail::add_quad(m, {0, 0, 0}, {hx, 0, 0}, {0, 0, hz});                // bottom
    detail::add_quad(m, {hx, h / 2, 0}, {0, 0, -hz}, {0, h / 2, 0});       // back wall
    detail::add_quad(m, {0, h / 2, 0}, {0, 0, hz}, {hx, h / 2, 0});        // slope
    detail::add_triangle(m, {-hx, 0, hz}, {hx, 0, hz}, {hx, h, hz}, {0, 0}, {sx, 0}, {sx, h});
    detail::add_triangle(m, {-hx, 0, -hz}, {hx, h, -hz}, {hx, 0, -hz}, {sx, 0}, {0, h}, {0, 0});
    return m;
}

}  // namespace wob::primitives
