#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "wob/core/image.hpp"

namespace wob {

struct PlotSeries {
    std::vector<double> x, y;  // y NaN leaves a gap
    Rgb color;
};

/// Minimal line chart: axes box, a light grid at tenths and the series drawn
/// with Bresenham lines. y is fixed to [0, 1]; x spans the data.
inline RgbImage line_plot(const std::vector<PlotSeries>& series, int width = 360, int height = 240) {
    RgbImage img(width, height, {255, 255, 255});
    const int l = 30, r = width - 10, t = 10, b = height - 25;
    double x0 = INFINITY, x1 = -INFINITY;
    for (const auto& s : series)
        for (double v : s.x)
            if (std::isfinite(v)) {
                x0 = std::min(x0, v);
                x1 = std::max(x1, v);
            }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1;
    if (x1 <= x0) x1 = x0 + 1;
    auto px = [&](double v) { return l + int(std::lround((v - x0) / (x1 - x0) * (r - l))); };
    auto py = [&](double v) { return b - int(std::lround(std::clamp(v, 0.0, 1.0) * (b - t))); };
    auto put = [&](int x, int y, Rgb c) {
        if (x >= 0 && y >= 0 && x < width && y < height) img.set(x, y, c);
    };
    auto line = [&](int xa, int ya, int xb, int yb, Rgb c) {
        const int dx = std::abs(xb - xa), dy = -std::abs(yb - ya);
        const int sx = xa < xb ? 1 : -1, sy = ya < yb ? 1 : -1;
        int err = dx + dy;
        for (;;) {
            put(xa, ya, c);
            if (xa == xb && ya == yb) break;
            const int e2 = 2 * err;
            if (e2 >= dy) err += dy, xa += sx;
            if (e2 <= dx) err += dx, ya += sy;
        }
    };
    for (int i = 0; i <= 10; ++i) {
        const int y = py(i / 10.0);
        line(l, y, r, y, {225, 225, 225});
        const int x = l + (r - l) * i / 10;
        line(x, t, x, b, {225, 225, 225});
    }
    line(l, t, l, b, kBlack);
    line(l, b, r, b, kBlack);
    line(r, t, r, b, kBlack);
    line(l, t, r, t, kBlack);
    for (const auto& s : series) {
        bool have = false;
        int lx = 0, ly = 0;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i]) || !std::isfinite(s.x[i])) {
                have = false;
                continue;
            }
            const int x = px(s.x[i]), y = py(s.y[i]);
            if (have) line(lx, ly, x, y, s.color);
            else put(x, y, s.color);
            lx = x, ly = y, have = true;
        }
    }
    return img;
}

}  // namespace wob
