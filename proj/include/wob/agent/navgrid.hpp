#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "wob/core/math.hpp"

namespace wob {

struct Cell {
    int col = 0;
    int row = 0;
    friend constexpr bool operator==(Cell, Cell) = default;
};

/// Walkability over the floor's x/z extent. Row index grows with z, column with x.
struct NavGrid {
    double cell_size = 0.5;
    double origin_x = 0.0;  // x of the left edge of column 0
    double origin_z = 0.0;  // z of the top edge of row 0
    int cols = 0;
    int rows = 0;
    std::vector<std::uint8_t> walkable;

    NavGrid() = default;
    NavGrid(double cell, double ox, double oz, int c, int r)
        : cell_size(cell), origin_x(ox), origin_z(oz), cols(c), rows(r), walkable(std::size_t(c) * r, 1) {}

    bool in_bounds(Cell c) const { return c.col >= 0 && c.row >= 0 && c.col < cols && c.row < rows; }
    std::size_t index(Cell c) const { return std::size_t(c.row) * cols + c.col; }
    bool is_walkable(Cell c) const { return in_bounds(c) && walkable[index(c)] != 0; }
    void set_walkable(Cell c, bool w) { walkable[index(c)] = w ? 1 : 0; }

    Vec2 center(Cell c) const {
        return {origin_x + (c.col + 0.5) * cell_size, origin_z + (c.row + 0.5) * cell_size};
    }
    /// Cell containing a floor point (x, z); may be out of bounds.
    Cell cell_of(Vec2 p) const {
        return {int(std::floor((p.x - origin_x) / cell_size)), int(std::floor((p.y - origin_z) / cell_size))};
    }

    std::size_t walkable_count() const {
        std::size_t n = 0;
        for (auto w : walkable) n += w != 0;
        return n;
    }

    /// Nearest walkable cell centre to p within max_dist (Euclidean on centres).
    std::optional<Cell> nearest_walkable(Vec2 p, double max_dist) const {
        const Cell c0 = cell_of(p);
        const int reach = int(std::ceil(max_dist / cell_size)) + 1;
        std::optional<Cell> best;
        double best_d = max_dist * max_dist;
        for (int dr = -reach; dr <= reach; ++dr) {
            for (int dc = -reach; dc <= reach; ++dc) {
                const Cell c{c0.col + dc, c0.row + dr};
                if (!is_walkable(c)) continue;
                const Vec2 d = center(c) - p;
                const double d2 = d.x * d.x + d.y * d.y;
                // Strict comparison plus scan order gives a deterministic tie-break.
                if (d2 < best_d || (!best && d2 <= best_d)) {
                    best_d = d2;
                    best = c;
                }
            }
        }
        return best;
    }

    friend bool operator==(const NavGrid&, const NavGrid&) = default;
};

}  // namespace wob
