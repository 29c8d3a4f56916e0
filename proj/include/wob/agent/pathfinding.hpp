#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "wob/agent/navgrid.hpp"

namespace wob {

enum class PathStatus { Found, Unreachable, InvalidEndpoint };

struct PathResult {
    PathStatus status = PathStatus::Unreachable;
    std::vector<Cell> cells;  // start to goal inclusive
    double cost = std::numeric_limits<double>::infinity();

    bool found() const { return status == PathStatus::Found; }
};

inline constexpr double kDiagonalCost = 1.4142135623730951;

/// Neighbours of c reachable in one move, with their costs. Diagonal moves
/// need both adjacent orthogonal cells free so paths never cut a corner.
template <typename Fn>
void for_each_neighbor(const NavGrid& g, Cell c, Fn&& fn) {
    static constexpr int dc[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int dr[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    for (int k = 0; k < 8; ++k) {
        const Cell n{c.col + dc[k], c.row + dr[k]};
        if (!g.is_walkable(n)) continue;
        if (k >= 4 && (!g.is_walkable({c.col + dc[k], c.row}) || !g.is_walkable({c.col, c.row + dr[k]}))) continue;
        fn(n, k < 4 ? 1.0 : kDiagonalCost);
    }
}

/// Octile distance; admissible and consistent for 8-connected unit grids.
inline double octile(Cell a, Cell b) {
    const double dx = std::abs(a.col - b.col), dy = std::abs(a.row - b.row);
    return std::max(dx, dy) + (kDiagonalCost - 1.0) * std::min(dx, dy);
}

/// A* over the walkable grid with costs 1 (orthogonal) and sqrt(2) (diagonal).
/// Ties break on lower heuristic then insertion order, so results are
/// deterministic.
inline PathResult shortest_path(const NavGrid& g, Cell start, Cell goal) {
    PathResult res;
    if (!g.is_walkable(start) || !g.is_walkable(goal)) {
        res.status = PathStatus::InvalidEndpoint;
        return res;
    }
    const std::size_t n = std::size_t(g.cols) * g.rows;
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<std::int64_t> parent(n, -1);
    std::vector<std::uint8_t> closed(n, 0);
    struct Entry {
        double f, h;
        std::uint64_t order;
        std::size_t idx;
        bool operator>(const Entry& o) const {
            if (f != o.f) return f > o.f;
            if (h != o.h) return h > o.h;
            return order > o.order;
        }
    };
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    std::uint64_t order = 0;
    const std::size_t s = g.index(start), t = g.index(goal);
    dist[s] = 0.0;
    open.push({octile(start, goal), octile(start, goal), order++, s});
    while (!open.empty()) {
        const Entry e = open.top();
        open.pop();
        if (closed[e.idx]) continue;
        closed[e.idx] = 1;
        if (e.idx == t) break;
        const Cell c{int(e.idx % g.cols), int(e.idx / g.cols)};
        for_each_neighbor(g, c, [&](Cell nb, double w) {
            const std::size_t j = g.index(nb);
            if (closed[j]) return;
            const double d = dist[e.idx] + w;
            if (d < dist[j] - 1e-12) {
                dist[j] = d;
                parent[j] = std::int64_t(e.idx);
                const double h = octile(nb, goal);
                open.push({d + h, h, order++, j});
            }
        });
    }
    if (!closed[t]) return res;
    res.status = PathStatus::Found;
    res.cost = dist[t];
    for (std::int64_t i = std::int64_t(t); i >= 0; i = parent[std::size_t(i)])
        res.cells.push_back({int(std::size_t(i) % g.cols), int(std::size_t(i) / g.cols)});
    std::reverse(res.cells.begin(), res.cells.end());
    return res;
}

}  // namespace wob
