#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "wob/core/error.hpp"

namespace wob {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend constexpr bool operator==(Rgb, Rgb) = default;
    constexpr bool is_black() const { return r == 0 && g == 0 && b == 0; }
};

inline constexpr Rgb kBlack{0, 0, 0};

/// Interleaved row-major RGB image; also the in-memory texture format.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    RgbImage() = default;
    RgbImage(int w, int h, Rgb fill = kBlack) : width(w), height(h), pixels(std::size_t(w) * h * 3) {
        for (std::size_t i = 0; i < pixels.size(); i += 3) {
            pixels[i] = fill.r;
            pixels[i + 1] = fill.g;
            pixels[i + 2] = fill.b;
        }
    }

    Rgb at(int x, int y) const {
        const std::size_t i = (std::size_t(y) * width + x) * 3;
        return {pixels[i], pixels[i + 1], pixels[i + 2]};
    }
    void set(int x, int y, Rgb c) {
        const std::size_t i = (std::size_t(y) * width + x) * 3;
        pixels[i] = c.r;
        pixels[i + 1] = c.g;
        pixels[i + 2] = c.b;
    }
    bool valid() const {
        return width > 0 && height > 0 && pixels.size() == std::size_t(width) * height * 3;
    }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Channel-major (3 x H x W) RGB bytes, the observation layout.
struct PlanarImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    PlanarImage() = default;
    PlanarImage(int w, int h) : width(w), height(h), data(std::size_t(3) * w * h, 0) {}

    std::size_t plane() const { return std::size_t(width) * height; }
    std::size_t stride() const { return 3 * plane(); }

    Rgb at(int x, int y) const {
        const std::size_t i = std::size_t(y) * width + x;
        return {data[i], data[plane() + i], data[2 * plane() + i]};
    }
    void set(int x, int y, Rgb c) {
        const std::size_t i = std::size_t(y) * width + x;
        data[i] = c.r;
        data[plane() + i] = c.g;
        data[2 * plane() + i] = c.b;
    }
    void fill(Rgb c) {
        std::fill(data.begin(), data.begin() + plane(), c.r);
        std::fill(data.begin() + plane(), data.begin() + 2 * plane(), c.g);
        std::fill(data.begin() + 2 * plane(), data.end(), c.b);
    }

    RgbImage to_rgb() const {
        RgbImage out(width, height);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) out.set(x, y, at(x, y));
        return out;
    }

    friend bool operator==(const PlanarImage&, const PlanarImage&) = default;
};

/// Main camera observation.
struct Frame : PlanarImage {
    using PlanarImage::PlanarImage;
    friend bool operator==(const Frame&, const Frame&) = default;
};

/// Bug-mask camera output. Black is background; any other colour is a bug tag.
struct MaskFrame : PlanarImage {
    using PlanarImage::PlanarImage;
    friend bool operator==(const MaskFrame&, const MaskFrame&) = default;

    std::size_t tagged_pixels() const {
        std::size_t n = 0;
        const std::size_t p = plane();
        for (std::size_t i = 0; i < p; ++i)
            if (data[i] | data[p + i] | data[2 * p + i]) ++n;
        return n;
    }
    std::size_t count_color(Rgb c) const {
        std::size_t n = 0;
        const std::size_t p = plane();
        for (std::size_t i = 0; i < p; ++i)
            if (data[i] == c.r && data[p + i] == c.g && data[2 * p + i] == c.b) ++n;
        return n;
    }
};

// PPM (P6, maxval 255) -------------------------------------------------------

inline void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

inline void write_ppm(const std::filesystem::path& path, const PlanarImage& img) {
    write_ppm(path, img.to_rgb());
}

namespace detail {
inline void skip_ppm_space(std::istream& in) {
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (c == ' ' || c == '\n' || c == '\r' || c == '\t') {
            in.get();
        } else {
            return;
        }
    }
}
}  // namespace detail

inline RgbImage read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P6") throw ConfigError(path.string() + ": not a binary PPM (P6)");
    int w = 0, h = 0, maxval = 0;
    detail::skip_ppm_space(in);
    in >> w;
    detail::skip_ppm_space(in);
    in >> h;
    detail::skip_ppm_space(in);
    in >> maxval;
    in.get();
    if (!in || w <= 0 || h <= 0 || maxval != 255)
        throw ConfigError(path.string() + ": bad PPM header");
    RgbImage img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
    if (in.gcount() != std::streamsize(img.pixels.size()))
        throw DataIntegrityError(path.string() + ": truncated PPM data");
    return img;
}

/// Tiles images into a grid, row-major, with a 1-pixel separator.
inline RgbImage contact_sheet(std::span<const RgbImage> tiles, int columns, Rgb background = {32, 32, 32}) {
    if (tiles.empty()) return RgbImage(1, 1, background);
    const int tw = tiles.front().width;
    const int th = tiles.front().height;
    const int cols = std::max(1, std::min<int>(columns, int(tiles.size())));
    const int rows = (int(tiles.size()) + cols - 1) / cols;
    RgbImage sheet(cols * (tw + 1) + 1, rows * (th + 1) + 1, background);
    for (std::size_t t = 0; t < tiles.size(); ++t) {
        const int ox = int(t % cols) * (tw + 1) + 1;
        const int oy = int(t / cols) * (th + 1) + 1;
        for (int y = 0; y < std::min(th, tiles[t].height); ++y)
            for (int x = 0; x < std::min(tw, tiles[t].width); ++x) sheet.set(ox + x, oy + y, tiles[t].at(x, y));
    }
    return sheet;
}

}  // namespace wob
