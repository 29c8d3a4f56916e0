#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wob/core/error.hpp"

namespace wob {

struct Shape3 {
    int c = 3;
    int h = 84;
    int w = 84;
    std::size_t size() const { return std::size_t(c) * h * w; }
    friend bool operator==(Shape3, Shape3) = default;
};

enum class SsimWindow { Gaussian, Uniform };

struct SsimConfig {
    int window = 11;
    double sigma = 1.5;
    SsimWindow kind = SsimWindow::Gaussian;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;

    double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
    double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }

    void validate() const {
        if (window < 1 || window % 2 == 0) throw ConfigError("ssim.window must be a positive odd size");
        if (kind == SsimWindow::Gaussian && !(sigma > 0)) throw ConfigError("ssim.sigma must be positive");
        if (!(c1() > 0 && c2() > 0)) throw ConfigError("ssim stabilizers must be positive");
    }
};

/// Separable window taps; the 2-D window is the outer product and sums to 1.
inline std::vector<double> ssim_taps(const SsimConfig& cfg) {
    cfg.validate();
    std::vector<double> t(std::size_t(cfg.window));
    const int r = cfg.window / 2;
    double sum = 0;
    for (int i = 0; i < cfg.window; ++i) {
        const double d = i - r;
        t[i] = cfg.kind == SsimWindow::Gaussian ? std::exp(-d * d / (2 * cfg.sigma * cfg.sigma)) : 1.0;
        sum += t[i];
    }
    for (auto& v : t) v /= sum;
    return t;
}

namespace ssim_detail {

/// Valid-mode separable filter of an h x w plane.
inline void filter_valid(const double* in, int h, int w, const std::vector<double>& k, double* tmp, double* out) {
    const int n = int(k.size());
    const int ow = w - n + 1, oh = h - n + 1;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += k[i] * in[y * w + x + i];
            tmp[y * ow + x] = s;
        }
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += k[i] * tmp[(y + i) * ow + x];
            out[y * ow + x] = s;
        }
}

/// Adjoint of filter_valid: scatters an (h-n+1) x (w-n+1) map back to h x w.
inline void filter_adjoint(const double* in, int h, int w, const std::vector<double>& k, double* tmp, double* out) {
    const int n = int(k.size());
    const int ow = w - n + 1, oh = h - n + 1;
    for (int i = 0; i < h * ow; ++i) tmp[i] = 0;
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            for (int i = 0; i < n; ++i) tmp[(y + i) * ow + x] += k[i] * in[y * ow + x];
    for (int i = 0; i < h * w; ++i) out[i] = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x)
            for (int i = 0; i < n; ++i) out[y * w + x + i] += k[i] * tmp[y * ow + x];
}

}  // namespace ssim_detail

/// Mean local SSIM of x against y (C x H x W, values in [0, 1]). When grad is
/// given it receives d ssim / d x.
template <typename T>
double ssim(std::span<const T> x, std::span<const T> y, Shape3 s, const SsimConfig& cfg = {}, std::span<T> grad = {}) {
    using namespace ssim_detail;
    if (x.size() != s.size() || y.size() != s.size()) throw ConfigError("ssim: input size does not match shape");
    if (!grad.empty() && grad.size() != s.size()) throw ConfigError("ssim: gradient size does not match shape");
    const auto k = ssim_taps(cfg);
    const int n = cfg.window;
    if (s.h < n || s.w < n) throw ConfigError("ssim: image smaller than the window");
    const int oh = s.h - n + 1, ow = s.w - n + 1;
    const std::size_t plane = std::size_t(s.h) * s.w, oplane = std::size_t(oh) * ow;
    const double c1 = cfg.c1(), c2 = cfg.c2();
    const double norm = 1.0 / double(oplane * s.c);

    std::vector<double> px(plane), py(plane), pxx(plane), pyy(plane), pxy(plane), tmp(std::size_t(s.h) * ow);
    std::vector<double> mx(oplane), my(oplane), exx(oplane), eyy(oplane), exy(oplane);
    std::vector<double> gm(oplane), gxx(oplane), gxy(oplane), back(plane);
    double total = 0;
    for (int c = 0; c < s.c; ++c) {
        const T* xc = x.data() + c * plane;
        const T* yc = y.data() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            px[i] = double(xc[i]);
            py[i] = double(yc[i]);
            pxx[i] = px[i] * px[i];
            pyy[i] = py[i] * py[i];
            pxy[i] = px[i] * py[i];
        }
        filter_valid(px.data(), s.h, s.w, k, tmp.data(), mx.data());
        filter_valid(py.data(), s.h, s.w, k, tmp.data(), my.data());
        filter_valid(pxx.data(), s.h, s.w, k, tmp.data(), exx.data());
        filter_valid(pyy.data(), s.h, s.w, k, tmp.data(), eyy.data());
        filter_valid(pxy.data(), s.h, s.w, k, tmp.data(), exy.data());
        for (std::size_t i = 0; i < oplane; ++i) {
            const double ux = mx[i], uy = my[i];
            const double vx = exx[i] - ux * ux, vy = eyy[i] - uy * uy, cxy = exy[i] - ux * uy;
            const double a1 = 2 * ux * uy + c1, a2 = 2 * cxy + c2;
            const double b1 = ux * ux + uy * uy + c1, b2 = vx + vy + c2;
            const double v = a1 * a2 / (b1 * b2);
            total += v;
            if (!grad.empty()) {
                // Derivatives with respect to the local moments mu_x, E[x^2], E[xy].
                gm[i] = norm * ((2 * uy * a2 - 2 * uy * a1) / (b1 * b2) - v * (2 * ux / b1 - 2 * ux / b2));
                gxx[i] = norm * (-v / b2);
                gxy[i] = norm * (2 * a1 / (b1 * b2));
            }
        }
        if (!grad.empty()) {
            T* g = grad.data() + c * plane;
            filter_adjoint(gm.data(), s.h, s.w, k, tmp.data(), back.data());
            for (std::size_t i = 0; i < plane; ++i) px[i] = back[i];  // reuse as accumulator
            filter_adjoint(gxx.data(), s.h, s.w, k, tmp.data(), back.data());
            for (std::size_t i = 0; i < plane; ++i) px[i] += 2 * double(xc[i]) * back[i];
            filter_adjoint(gxy.data(), s.h, s.w, k, tmp.data(), back.data());
            for (std::size_t i = 0; i < plane; ++i) g[i] = T(px[i] + double(yc[i]) * back[i]);
        }
    }
    return total * norm;
}

template <typename T>
double ssim(const std::vector<T>& x, const std::vector<T>& y, Shape3 s, const SsimConfig& cfg = {}) {
    return ssim<T>(std::span<const T>(x), std::span<const T>(y), s, cfg);
}

template <typename T>
double mse(std::span<const T> x, std::span<const T> y) {
    if (x.size() != y.size()) throw ConfigError("mse: size mismatch");
    if (x.empty()) return 0.0;
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = double(x[i]) - double(y[i]);
        s += d * d;
    }
    return s / double(x.size());
}

}  // namespace wob
