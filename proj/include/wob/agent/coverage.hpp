#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "wob/agent/navgrid.hpp"
#include "wob/core/error.hpp"
#include "wob/core/image.hpp"

namespace wob {

/// Visit counts per nav cell.
class CoverageMap {
public:
    explicit CoverageMap(NavGrid grid) : grid_(std::move(grid)), visits_(grid_.walkable.size(), 0) {}

    void visit(Vec2 p) {
        const Cell c = grid_.cell_of(p);
        if (grid_.in_bounds(c)) ++visits_[grid_.index(c)];
    }
    /// Adds another map's counts; both must be over the same grid.
    void merge(const CoverageMap& other) {
        if (!(other.grid_ == grid_)) throw ConfigError("coverage: cannot merge maps from different scenes");
        for (std::size_t i = 0; i < visits_.size(); ++i) visits_[i] += other.visits_[i];
    }

    std::uint64_t total() const {
        std::uint64_t t = 0;
        for (auto v : visits_) t += v;
        return t;
    }

    std::uint64_t visits(Cell c) const { return grid_.in_bounds(c) ? visits_[grid_.index(c)] : 0; }

    /// Fraction of walkable cells visited at least once.
    double fraction() const {
        std::size_t walk = 0, seen = 0;
        for (std::size_t i = 0; i < visits_.size(); ++i) {
            if (!grid_.walkable[i]) continue;
            ++walk;
            seen += visits_[i] > 0;
        }
        return walk ? double(seen) / double(walk) : 0.0;
    }

    const NavGrid& grid() const { return grid_; }

    /// Grayscale heat map, log-scaled so one visit is already visible.
    /// Blocked cells are dark red, unvisited walkable cells black. Row 0 on top.
    RgbImage heatmap(int cell_pixels = 4) const {
        RgbImage img(grid_.cols * cell_pixels, grid_.rows * cell_pixels);
        std::uint64_t mx = 1;
        for (auto v : visits_) mx = std::max(mx, v);
        for (int r = 0; r < grid_.rows; ++r)
            for (int c = 0; c < grid_.cols; ++c) {
                const auto v = visits_[grid_.index({c, r})];
                Rgb col = kBlack;
                if (v > 0) {
                    const auto g = std::uint8_t(std::lround(64 + 191 * std::log1p(double(v)) / std::log1p(double(mx))));
                    col = {g, g, g};
                } else if (!grid_.walkable[grid_.index({c, r})]) {
                    col = {60, 0, 0};
                }
                for (int y = 0; y < cell_pixels; ++y)
                    for (int x = 0; x < cell_pixels; ++x) img.set(c * cell_pixels + x, r * cell_pixels + y, col);
            }
        return img;
    }

private:
    NavGrid grid_;
    std::vector<std::uint64_t> visits_;
};

}  // namespace wob
