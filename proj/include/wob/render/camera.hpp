#pragma once

#include <cmath>
#include <optional>

#include "wob/core/error.hpp"
#include "wob/core/math.hpp"
#include "wob/scene/types.hpp"

namespace wob {

/// Pinhole camera with no pitch or roll; looks along yaw_forward(pose.yaw).
struct Camera {
    Pose pose;  // eye position
    double vertical_fov = deg2rad(60.0);
    double near_plane = 0.1;
    double far_plane = 100.0;
    int width = 84;
    int height = 84;

    void validate() const {
        if (!(near_plane > 0.0 && near_plane < far_plane)) throw ConfigError("camera: need 0 < near < far");
        if (!(vertical_fov > 0.0 && vertical_fov < kPi)) throw ConfigError("camera: fov must be in (0, pi)");
        if (width <= 0 || height <= 0) throw ConfigError("camera: resolution must be positive");
    }

    Vec3 forward() const { return yaw_forward(pose.yaw); }
    Vec3 up() const { return {0, 1, 0}; }
    Vec3 right() const { return cross(forward(), up()); }

    double focal() const { return 1.0 / std::tan(vertical_fov / 2.0); }
    double aspect() const { return double(width) / double(height); }

    /// World point to view space: x right, y up, z = depth along forward.
    Vec3 to_view(Vec3 p) const {
        const Vec3 d = p - pose.position;
        return {dot(d, right()), dot(d, up()), dot(d, forward())};
    }

    /// View-space point (depth > 0) to continuous screen coordinates, origin at
    /// the top-left corner, y growing downwards.
    Vec2 view_to_screen(Vec3 v) const {
        const double f = focal();
        const double nx = f * v.x / (aspect() * v.z);
        const double ny = f * v.y / v.z;
        return {(nx + 1.0) * 0.5 * width, (1.0 - ny) * 0.5 * height};
    }

    /// Direction of the view ray through continuous screen point (sx, sy),
    /// scaled so its forward component is 1.
    Vec3 ray_direction(double sx, double sy) const {
        const double nx = 2.0 * sx / width - 1.0;
        const double ny = 1.0 - 2.0 * sy / height;
        const double t = 1.0 / focal();
        return forward() + right() * (nx * aspect() * t) + up() * (ny * t);
    }
};

struct ProjectedPoint {
    double x = 0;
    double y = 0;
    double depth = 0;
};

/// Perspective projection of a world point; nullopt when the point lies in
/// front of the near plane (or behind the camera) or beyond the far plane.
inline std::optional<ProjectedPoint> project_vertex(const Camera& cam, Vec3 p) {
    const Vec3 v = cam.to_view(p);
    if (v.z < cam.near_plane || v.z > cam.far_plane) return std::nullopt;
    const Vec2 s = cam.view_to_screen(v);
    return ProjectedPoint{s.x, s.y, v.z};
}

/// Camera for an agent standing at pose (feet position).
inline Camera agent_camera(const World& world, const Pose& agent, const Camera& base = {}) {
    Camera cam = base;
    cam.pose = agent;
    cam.pose.position.y += world.agent_body.eye_height;
    return cam;
}

}  // namespace wob
