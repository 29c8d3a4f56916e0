#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "wob/agent/pathfinding.hpp"
#include "wob/core/error.hpp"
#include "wob/core/math.hpp"
#include "wob/core/rng.hpp"
#include "wob/scene/types.hpp"

namespace wob {

enum class Action : std::uint8_t { Idle = 0, Forward = 1, TurnLeft = 2, TurnRight = 3 };

struct AgentConfig {
    double epsilon = 0.1;                     // chance of a uniformly random action
    double cone_half_angle = deg2rad(60.0);   // goals otherwise lie ahead
    double min_goal_distance = 2.0;
    double max_goal_distance = 8.0;
    double speed = 2.0;                       // m/s
    double turn_rate = deg2rad(90.0);         // rad/s
    double dt = 0.1;                          // s per step
    double heading_tolerance = deg2rad(5.0);
    double reach_radius = 0.35;
    double snap_distance = 1.0;               // raw goal to walkable cell
    int max_goal_attempts = 20;
    double gravity = 9.81;
    double fall_limit = 10.0;                 // respawn this far below the floor

    void validate() const {
        if (!(epsilon >= 0 && epsilon <= 1)) throw ConfigError("agent.epsilon must be in [0, 1]");
        if (!(cone_half_angle > 0 && cone_half_angle <= kPi)) throw ConfigError("agent.cone_half_angle must be in (0, pi]");
        if (!(min_goal_distance > 0 && max_goal_distance >= min_goal_distance))
            throw ConfigError("agent goal distances need 0 < min <= max");
        if (!(speed > 0 && turn_rate > 0 && dt > 0)) throw ConfigError("agent speed, turn_rate and dt must be positive");
        if (!(heading_tolerance > 0)) throw ConfigError("agent.heading_tolerance must be positive");
        if (!(reach_radius > 0)) throw ConfigError("agent.reach_radius must be positive");
        if (max_goal_attempts < 1) throw ConfigError("agent.max_goal_attempts must be >= 1");
    }
};

inline nlohmann::json to_json(const AgentConfig& c) {
    return {{"epsilon", c.epsilon},
            {"cone_half_angle_deg", rad2deg(c.cone_half_angle)},
            {"min_goal_distance", c.min_goal_distance},
            {"max_goal_distance", c.max_goal_distance},
            {"speed", c.speed},
            {"turn_rate_deg", rad2deg(c.turn_rate)},
            {"dt", c.dt},
            {"heading_tolerance_deg", rad2deg(c.heading_tolerance)},
            {"reach_radius", c.reach_radius}};
}

inline AgentConfig agent_config_from_json(const nlohmann::json& j, AgentConfig c = {}) {
    if (!j.is_object()) throw ConfigError("agent: expected an object");
    for (const auto& [k, v] : j.items()) {
        if (!v.is_number()) throw ConfigError("agent." + k + ": expected a number");
        const double x = v.get<double>();
        if (k == "epsilon") c.epsilon = x;
        else if (k == "cone_half_angle_deg") c.cone_half_angle = deg2rad(x);
        else if (k == "min_goal_distance") c.min_goal_distance = x;
        else if (k == "max_goal_distance") c.max_goal_distance = x;
        else if (k == "speed") c.speed = x;
        else if (k == "turn_rate_deg") c.turn_rate = deg2rad(x);
        else if (k == "dt") c.dt = x;
        else if (k == "heading_tolerance_deg") c.heading_tolerance = deg2rad(x);
        else if (k == "reach_radius") c.reach_radius = x;
        else throw ConfigError("agent: unknown field '" + k + "'");
    }
    c.validate();
    return c;
}

struct AgentState {
    Pose pose;                        // feet position
    double vertical_velocity = 0.0;
    std::optional<Vec2> goal;
    std::vector<Vec2> waypoints;      // remaining, goal last
    bool blocked = false;             // last forward move hit something
    std::uint64_t respawns = 0;
};

struct StepResult {
    Action action = Action::Idle;
    bool respawned = false;
};

/// Heading controller plus simple body physics. All randomness comes from the
/// agent's own generator.
class Agent {
public:
    Agent(AgentConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) { cfg_.validate(); }

    const AgentConfig& config() const { return cfg_; }
    const AgentState& state() const { return state_; }
    AgentState& state() { return state_; }

    /// Places the agent on a uniformly random walkable cell, facing a random yaw.
    void spawn(const World& world) {
        const Vec2 p = random_walkable(world.walkable_grid);
        state_ = {};
        state_.pose = {{p.x, world.floor.height, p.y}, rng_.uniform(0.0, kTwoPi)};
    }
    void place(const Pose& pose) {
        state_ = {};
        state_.pose = pose;
    }

    /// Forces the next goal (replans immediately on the next step).
    void set_goal(Vec2 goal) {
        state_.goal = goal;
        state_.waypoints.clear();
        forced_ = true;
    }

    /// Samples a goal in the forward cone (uniform angle within the half-angle,
    /// uniform distance in [min, max]) and refines it to the nearest walkable
    /// cell centre. Resamples on a miss, then falls back to any walkable cell.
    Vec2 sample_goal(const NavGrid& g) {
        const Vec2 here{state_.pose.position.x, state_.pose.position.z};
        for (int i = 0; i < cfg_.max_goal_attempts; ++i) {
            const Vec2 raw = sample_cone_point(here);
            if (auto c = g.nearest_walkable(raw, cfg_.snap_distance)) return g.center(*c);
        }
        return random_walkable(g);
    }

    /// Raw cone sample before refinement.
    Vec2 sample_cone_point(Vec2 here) {
        const double yaw = state_.pose.yaw + rng_.uniform(-cfg_.cone_half_angle, cfg_.cone_half_angle);
        const double r = rng_.uniform(cfg_.min_goal_distance, cfg_.max_goal_distance);
        const Vec3 f = yaw_forward(yaw);
        return {here.x + f.x * r, here.y + f.z * r};
    }

    /// One control step in `world` (the world as currently modified by bugs).
    /// With probability epsilon a uniformly random action is taken; otherwise
    /// the agent turns towards the path or walks forward.
    StepResult step(const World& world) {
        StepResult res;
        if (fall(world, res)) return res;

        if (rng_.bernoulli(cfg_.epsilon)) {
            res.action = static_cast<Action>(rng_.below(4));
        } else {
            res.action = greedy_action(world.walkable_grid);
        }
        apply(world, res.action);
        if (state_.blocked) {
            state_.goal.reset();
            state_.waypoints.clear();
        }
        return res;
    }

    /// Executes an action with collision checks; exposed for scripted runs.
    void apply(const World& world, Action a) {
        state_.blocked = false;
        const double turn = cfg_.turn_rate * cfg_.dt;
        if (a == Action::TurnLeft) state_.pose.yaw = wrap_angle(state_.pose.yaw + turn);
        if (a == Action::TurnRight) state_.pose.yaw = wrap_angle(state_.pose.yaw - turn);
        if (a == Action::Forward) {
            const Vec3 f = yaw_forward(state_.pose.yaw);
            Vec3 next = state_.pose.position + f * (cfg_.speed * cfg_.dt);
            const auto& e = world.floor.extent;
            const bool inside = e.contains(next.x, next.z);
            if (!inside || enters_collider(world, next)) {
                state_.blocked = true;
            } else {
                state_.pose.position = next;
            }
        }
        settle(world);
    }

private:
    Vec2 random_walkable(const NavGrid& g) {
        const auto n = g.walkable_count();
        if (n == 0) throw ConfigError("agent: no walkable cell");
        std::uint64_t k = rng_.below(n);
        for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c)
                if (g.is_walkable({c, r}) && k-- == 0) return g.center({c, r});
        return g.center({0, 0});
    }

    Action greedy_action(const NavGrid& g) {
        if (state_.waypoints.empty()) plan(g);
        const Vec2 here{state_.pose.position.x, state_.pose.position.z};
        advance(here);
        if (state_.waypoints.empty()) {
            state_.goal.reset();
            plan(g);
            advance(here);
            if (state_.waypoints.empty()) return Action::Idle;
        }
        // Steer at the farthest waypoint in a clear straight line, so diagonal
        // grid steps do not turn into zig-zags.
        std::size_t k = 0;
        for (std::size_t j = state_.waypoints.size(); j-- > 1;)
            if (clear_line(g, here, state_.waypoints[j])) {
                k = j;
                break;
            }
        const Vec2 to = state_.waypoints[k] - here;
        const double diff = angle_diff(heading_of(to.x, to.y), state_.pose.yaw);
        if (std::abs(diff) > cfg_.heading_tolerance) return diff > 0 ? Action::TurnLeft : Action::TurnRight;
        return Action::Forward;
    }

    /// Moves along the path: drops waypoints before the closest one and any
    /// within the reach radius.
    void advance(Vec2 here) {
        auto& w = state_.waypoints;
        if (w.empty()) return;
        std::size_t best = 0;
        double best_d = length(w[0] - here);
        for (std::size_t j = 1; j < w.size(); ++j) {
            const double d = length(w[j] - here);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        w.erase(w.begin(), w.begin() + std::ptrdiff_t(best));
        while (!w.empty() && length(w.front() - here) < cfg_.reach_radius) w.erase(w.begin());
    }

    void plan(const NavGrid& g) {
        const Vec2 here{state_.pose.position.x, state_.pose.position.z};
        Cell start = g.cell_of(here);
        if (!g.is_walkable(start)) {
            // Standing in a blocked cell (e.g. inside an object): route from the nearest free one.
            auto c = g.nearest_walkable(here, 3.0);
            if (!c) return;
            start = *c;
        }
        for (int i = 0; i < cfg_.max_goal_attempts; ++i) {
            const bool forced = forced_ && state_.goal;
            const Vec2 goal = forced ? *state_.goal : sample_goal(g);
            forced_ = false;
            Cell gc = g.cell_of(goal);
            if (!g.is_walkable(gc)) {
                // A forced goal may sit in a blocked cell; aim as close as possible.
                auto c = g.nearest_walkable(goal, 3.0);
                if (!c) continue;
                gc = *c;
            }
            const auto path = shortest_path(g, start, gc);
            if (!path.found()) continue;
            state_.goal = g.center(gc);
            state_.waypoints.clear();
            for (const auto& c : path.cells) state_.waypoints.push_back(g.center(c));
            return;
        }
    }

    /// True when every point of the segment lies in a walkable cell.
    static bool clear_line(const NavGrid& g, Vec2 a, Vec2 b) {
        const double len = length(b - a);
        const int n = std::max(1, int(std::ceil(len / (0.25 * g.cell_size))));
        for (int i = 0; i <= n; ++i) {
            const double t = double(i) / n;
            if (!g.is_walkable(g.cell_of(a + (b - a) * t))) return false;
        }
        return true;
    }

    bool enters_collider(const World& world, Vec3 next) const {
        const auto now = colliding_objects(world, state_.pose.position.x, state_.pose.position.z, state_.pose.position.y);
        for (auto i : colliding_objects(world, next.x, next.z, next.y))
            if (std::find(now.begin(), now.end(), i) == now.end()) return true;
        return false;
    }

    bool below_floor(const World& world) const { return state_.pose.position.y < world.floor.height - 1e-9; }

    /// Gravity and ground contact.
    void settle(const World& world) {
        auto& p = state_.pose.position;
        const double floor_y = world.floor.height;
        if (world.floor.supports(p.x, p.z) && p.y >= floor_y - 0.05) {
            p.y = floor_y;
            state_.vertical_velocity = 0.0;
            return;
        }
        state_.vertical_velocity -= cfg_.gravity * cfg_.dt;
        p.y += state_.vertical_velocity * cfg_.dt;
    }

    /// Handles an agent without ground under it; true while it is falling.
    bool fall(const World& world, StepResult& res) {
        if (!below_floor(world) && world.floor.supports(state_.pose.position.x, state_.pose.position.z)) return false;
        settle(world);
        if (state_.pose.position.y < world.floor.height - cfg_.fall_limit) {
            const auto respawns = state_.respawns + 1;
            spawn(world);
            state_.respawns = respawns;
            res.respawned = true;
        }
        return true;
    }

    AgentConfig cfg_;
    Rng rng_;
    AgentState state_;
    bool forced_ = false;
};

}  // namespace wob
