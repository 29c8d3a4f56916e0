#include <catch_amalgamated.hpp>

#include <limits>

#include "wob/agent/agent.hpp"
#include "wob/agent/coverage.hpp"
#include "wob/agent/pathfinding.hpp"
#include "wob/scene/scene_io.hpp"

using namespace wob;
using Catch::Approx;

namespace {

const World& world() {
    static const World w = load_scene(std::filesystem::path(WOB_DATA_DIR) / "scenes" / "default.json");
    return w;
}

// Plain Dijkstra over an explicit edge list; shares nothing with the A* code.
double dijkstra(const NavGrid& g, Cell s, Cell t) {
    const int n = g.cols * g.rows;
    std::vector<double> d(n, std::numeric_limits<double>::infinity());
    std::vector<bool> done(n, false);
    auto free = [&](int c, int r) { return c >= 0 && r >= 0 && c < g.cols && r < g.rows && g.walkable[r * g.cols + c]; };
    d[s.row * g.cols + s.col] = 0;
    for (;;) {
        int u = -1;
        for (int i = 0; i < n; ++i)
            if (!done[i] && d[i] < std::numeric_limits<double>::infinity() && (u < 0 || d[i] < d[u])) u = i;
        if (u < 0) break;
        done[u] = true;
        const int uc = u % g.cols, ur = u / g.cols;
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                if (!dr && !dc) continue;
                if (!free(uc + dc, ur + dr)) continue;
                if (dr && dc && (!free(uc + dc, ur) || !free(uc, ur + dr))) continue;
                const double w = (dr && dc) ? std::sqrt(2.0) : 1.0;
                const int v = (ur + dr) * g.cols + uc + dc;
                d[v] = std::min(d[v], d[u] + w);
            }
    }
    return d[t.row * g.cols + t.col];
}

NavGrid random_grid(Rng& rng, int n, double density) {
    NavGrid g(1.0, 0, 0, n, n);
    for (auto& w : g.walkable) w = rng.uniform() >= density;
    return g;
}

}  // namespace

TEST_CASE("A* matches an independent Dijkstra on random grids") {
    Rng rng(2024);
    int found = 0, unreachable = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const NavGrid g = random_grid(rng, 10, rng.uniform(0.1, 0.45));
        const Cell s{int(rng.below(10)), int(rng.below(10))};
        const Cell t{int(rng.below(10)), int(rng.below(10))};
        const auto res = shortest_path(g, s, t);
        if (!g.is_walkable(s) || !g.is_walkable(t)) {
            CHECK(res.status == PathStatus::InvalidEndpoint);
            continue;
        }
        const double ref = dijkstra(g, s, t);
        if (std::isinf(ref)) {
            CHECK(res.status == PathStatus::Unreachable);
            ++unreachable;
            continue;
        }
        REQUIRE(res.found());
        ++found;
        CHECK(res.cost == Approx(ref).margin(1e-9));
        // The returned cells form a legal path whose length is the reported cost.
        REQUIRE(res.cells.front() == s);
        REQUIRE(res.cells.back() == t);
        double len = 0;
        for (std::size_t k = 1; k < res.cells.size(); ++k) {
            const Cell a = res.cells[k - 1], b = res.cells[k];
            const int dc = b.col - a.col, dr = b.row - a.row;
            CHECK(std::abs(dc) <= 1);
            CHECK(std::abs(dr) <= 1);
            CHECK(g.is_walkable(b));
            if (dc && dr) CHECK((g.is_walkable({a.col + dc, a.row}) && g.is_walkable({a.col, a.row + dr})));
            len += (dc && dr) ? std::sqrt(2.0) : 1.0;
        }
        CHECK(len == Approx(res.cost).margin(1e-9));
    }
    CHECK(found > 300);
    CHECK(unreachable > 10);
}

TEST_CASE("A* handles trivial and blocked endpoints") {
    NavGrid g(1.0, 0, 0, 3, 3);
    auto same = shortest_path(g, {1, 1}, {1, 1});
    REQUIRE(same.found());
    CHECK(same.cost == 0.0);
    CHECK(same.cells.size() == 1);
    g.set_walkable({2, 2}, false);
    CHECK(shortest_path(g, {0, 0}, {2, 2}).status == PathStatus::InvalidEndpoint);
    CHECK(shortest_path(g, {0, 0}, {5, 5}).status == PathStatus::InvalidEndpoint);
    // Wall splitting the grid.
    NavGrid w(1.0, 0, 0, 3, 3);
    for (int r = 0; r < 3; ++r) w.set_walkable({1, r}, false);
    CHECK(shortest_path(w, {0, 0}, {2, 2}).status == PathStatus::Unreachable);
    // Diagonal squeeze between two blocked corners is not allowed.
    NavGrid d(1.0, 0, 0, 2, 2);
    d.set_walkable({1, 0}, false);
    d.set_walkable({0, 1}, false);
    CHECK(shortest_path(d, {0, 0}, {1, 1}).status == PathStatus::Unreachable);
}

TEST_CASE("turn actions follow the yaw convention") {
    Agent a({}, 1);
    a.place({{0, 0, 0}, 0.0});
    a.apply(world(), Action::TurnLeft);
    CHECK(a.state().pose.yaw == Approx(deg2rad(9.0)));
    a.apply(world(), Action::TurnRight);
    a.apply(world(), Action::TurnRight);
    CHECK(a.state().pose.yaw == Approx(kTwoPi - deg2rad(9.0)));
    a.place({{0, 0, 0}, 0.0});
    a.apply(world(), Action::Forward);
    CHECK(a.state().pose.position.x == Approx(0.2));
    CHECK(a.state().pose.position.z == Approx(0.0).margin(1e-12));
}

TEST_CASE("collisions stop the agent at objects and walls") {
    Agent a({}, 1);
    // crate_4 spans x in [5.4, 6.6]; walk at it along +x.
    a.place({{3.0, 0, 3.0}, 0.0});
    for (int i = 0; i < 40; ++i) a.apply(world(), Action::Forward);
    CHECK(a.state().blocked);
    CHECK(a.state().pose.position.x < 5.4 - 0.3 + 1e-9);
    CHECK(a.state().pose.position.x > 5.4 - 0.3 - 0.2 - 1e-9);
    // An agent already overlapping an object can walk out of it.
    a.place({{6.0, 0, 3.0}, 0.0});
    for (int i = 0; i < 5; ++i) a.apply(world(), Action::Forward);
    CHECK(a.state().pose.position.x > 6.9);
}

TEST_CASE("falling through a hole ends in a respawn") {
    World w = world();
    w.floor.holes.push_back({-1, -1, 1, 1});
    Agent a({}, 3);
    a.place({{0, 0, 0}, 0.0});
    bool respawned = false;
    double lowest = 0;
    for (int i = 0; i < 100 && !respawned; ++i) {
        respawned = a.step(w).respawned;
        lowest = std::min(lowest, a.state().pose.position.y);
    }
    CHECK(respawned);
    CHECK(lowest < -5);
    CHECK(a.state().pose.position.y == 0.0);
    CHECK(a.state().respawns == 1);
    CHECK(w.walkable_grid.is_walkable(w.walkable_grid.cell_of({a.state().pose.position.x, a.state().pose.position.z})));
}

TEST_CASE("raw cone samples are uniform in angle and bounded in distance") {
    AgentConfig cfg;
    Agent a(cfg, 17);
    a.place({{0, 0, 0}, 0.0});
    std::array<int, 10> bins{};
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const Vec2 p = a.sample_cone_point({0, 0});
        const double d = length(p);
        CHECK(d >= cfg.min_goal_distance);
        CHECK(d <= cfg.max_goal_distance);
        const double ang = angle_diff(heading_of(p.x, p.y), 0.0);
        REQUIRE(std::abs(ang) <= cfg.cone_half_angle + 1e-12);
        const int b = std::min(9, int((ang + cfg.cone_half_angle) / (2 * cfg.cone_half_angle) * 10));
        ++bins[b];
    }
    // Chi-squared, 9 dof, critical value at p = 0.01 is 21.67.
    double chi2 = 0;
    for (int b : bins) chi2 += (b - n / 10.0) * (b - n / 10.0) / (n / 10.0);
    CHECK(chi2 < 21.67);
}

TEST_CASE("refined goals are walkable cell centres near the cone sample") {
    AgentConfig cfg;
    Agent a(cfg, 3);
    a.place({{0, 0, 0}, 0.0});
    const auto& g = world().walkable_grid;
    for (int i = 0; i < 2000; ++i) {
        const Vec2 goal = a.sample_goal(g);
        const Cell c = g.cell_of(goal);
        REQUIRE(g.is_walkable(c));
        CHECK(length(goal - g.center(c)) < 1e-12);
    }
    // A raw point inside crate_4 refines to a free neighbouring cell centre.
    const auto c = g.nearest_walkable({5.5, 3.0}, cfg.snap_distance);
    REQUIRE(c);
    CHECK(length(g.center(*c) - Vec2{5.5, 3.0}) <= cfg.snap_distance);
    CHECK_FALSE(g.is_walkable(g.cell_of({5.5, 3.0})));
}

TEST_CASE("epsilon = 1 gives uniformly random actions") {
    AgentConfig cfg;
    cfg.epsilon = 1.0;
    Agent a(cfg, 8);
    a.place({{0, 0, 0}, 0.0});
    std::array<int, 4> counts{};
    const int n = 10000;
    for (int i = 0; i < n; ++i) ++counts[int(a.step(world()).action)];
    // Chi-squared, 3 dof, critical value at p = 0.01 is 11.34.
    double chi2 = 0;
    for (int c : counts) chi2 += (c - n / 4.0) * (c - n / 4.0) / (n / 4.0);
    CHECK(chi2 < 11.34);
}

TEST_CASE("epsilon = 0 walks straight at a waypoint ahead") {
    AgentConfig cfg;
    cfg.epsilon = 0.0;
    Agent a(cfg, 8);
    a.place({{0.25, 0, 0.25}, 0.0});
    a.set_goal({4.25, 0.25});
    CHECK(a.step(world()).action == Action::Forward);
    a.place({{0.25, 0, 0.25}, kPi / 2});
    a.set_goal({4.25, 0.25});
    CHECK(a.step(world()).action == Action::TurnRight);
}

TEST_CASE("bug-free walks stay in bounds and out of objects") {
    Agent a({}, 21);
    a.spawn(world());
    const auto& e = world().floor.extent;
    int stall = 0, worst = 0;
    for (int i = 0; i < 50000; ++i) {
        const auto r = a.step(world());
        const auto& p = a.state().pose.position;
        REQUIRE(e.contains(p.x, p.z));
        REQUIRE(p.y == 0.0);
        REQUIRE(colliding_objects(world(), p.x, p.z, p.y).empty());
        stall = r.action == Action::Forward ? 0 : stall + 1;
        worst = std::max(worst, stall);
    }
    CHECK(worst <= 200);
}

TEST_CASE("no long stalls in an obstacle-free room") {
    World w = world();
    std::erase_if(w.objects, [](const SceneObject& o) { return !o.boundary && o.id != "floor"; });
    w.walkable_grid = build_nav_grid(w);
    Agent a({}, 4);
    a.spawn(w);
    int stall = 0, worst = 0;
    for (int i = 0; i < 20000; ++i) {
        stall = a.step(w).action == Action::Forward ? 0 : stall + 1;
        worst = std::max(worst, stall);
    }
    CHECK(worst <= 200);
}

TEST_CASE("coverage accumulates across episodes") {
    CoverageMap one(world().walkable_grid), all(world().walkable_grid);
    std::uint64_t steps = 0;
    for (std::uint64_t ep = 0; ep < 3; ++ep) {
        Agent a({}, ep);
        a.spawn(world());
        CoverageMap m(world().walkable_grid);
        for (int i = 0; i < 1000; ++i) {
            a.step(world());
            m.visit({a.state().pose.position.x, a.state().pose.position.z});
            ++steps;
        }
        if (ep == 0) one = m;
        all.merge(m);
    }
    CHECK(all.total() == steps);
    CHECK(all.fraction() >= one.fraction());
    const auto& g = world().walkable_grid;
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) CHECK(all.visits({c, r}) >= one.visits({c, r}));

    // A pinned agent fills a single cell.
    CoverageMap pinned(world().walkable_grid);
    for (int i = 0; i < 50; ++i) pinned.visit({0.1, 0.1});
    CHECK(pinned.total() == 50);
    CHECK(pinned.fraction() == Approx(1.0 / double(g.walkable_count())));

    NavGrid other(1.0, 0, 0, 3, 3);
    CHECK_THROWS_AS(all.merge(CoverageMap(other)), ConfigError);
}

TEST_CASE("agent runs are reproducible from the seed") {
    auto run = [](std::uint64_t seed) {
        Agent a({}, seed);
        a.spawn(world());
        std::vector<std::uint8_t> acts;
        for (int i = 0; i < 500; ++i) acts.push_back(std::uint8_t(a.step(world()).action));
        return acts;
    };
    CHECK(run(9) == run(9));
    CHECK(run(9) != run(10));
}

TEST_CASE("coverage map counts visits per cell") {
    NavGrid g(1.0, 0, 0, 4, 1);
    g.set_walkable({3, 0}, false);
    CoverageMap m(g);
    m.visit({0.5, 0.5});
    m.visit({0.7, 0.2});
    m.visit({2.5, 0.5});
    m.visit({9, 9});
    CHECK(m.visits({0, 0}) == 2);
    CHECK(m.fraction() == Approx(2.0 / 3.0));
    const auto img = m.heatmap(2);
    CHECK(img.width == 8);
    CHECK(img.at(0, 0) == Rgb{255, 255, 255});                 // most visited
    CHECK(img.at(2, 0) == kBlack);                              // walkable, unvisited
    const auto grey = std::uint8_t(std::lround(64 + 191 * std::log(2.0) / std::log(3.0)));
    CHECK(img.at(4, 0) == Rgb{grey, grey, grey});                       // one visit, log scale
    CHECK(img.at(6, 1) == Rgb{60, 0, 0});                       // blocked
}
