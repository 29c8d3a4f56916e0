#pragma once

#include <span>

#include "wob/metrics/ssim.hpp"

namespace wob {

struct LossWeights {
    double ssim = 0.9;
    double mse = 0.1;

    void validate() const {
        if (!(ssim >= 0 && mse >= 0)) throw ConfigError("loss weights must be non-negative");
        if (std::abs(ssim + mse - 1.0) > 1e-9) throw ConfigError("loss weights must sum to 1");
    }
};

struct LossValue {
    double loss = 0;
    double ssim = 0;  // mean over the batch
    double mse = 0;
};

/// weights.ssim * (1 - ssim) + weights.mse * mse, averaged over a batch of n
/// images. grad (optional, same size as recon) receives d loss / d recon.
template <typename T>
LossValue combined_loss(std::span<const T> recon, std::span<const T> target, std::size_t n, Shape3 s,
                        const LossWeights& weights = {}, const SsimConfig& cfg = {}, std::span<T> grad = {}) {
    weights.validate();
    const std::size_t per = s.size();
    if (recon.size() != n * per || target.size() != n * per) throw ConfigError("combined_loss: shape mismatch");
    if (!grad.empty() && grad.size() != recon.size()) throw ConfigError("combined_loss: gradient shape mismatch");
    LossValue out;
    const double inv_n = 1.0 / double(n);
    const double mse_scale = 2.0 * weights.mse / double(n * per);
    for (std::size_t b = 0; b < n; ++b) {
        const auto r = recon.subspan(b * per, per);
        const auto t = target.subspan(b * per, per);
        std::span<T> g = grad.empty() ? std::span<T>{} : grad.subspan(b * per, per);
        out.ssim += ssim<T>(r, t, s, cfg, g) * inv_n;
        out.mse += mse<T>(r, t) * inv_n;
        if (!g.empty())
            for (std::size_t i = 0; i < per; ++i)
                g[i] = T(-weights.ssim * inv_n * double(g[i]) + mse_scale * (double(r[i]) - double(t[i])));
    }
    out.loss = weights.ssim * (1.0 - out.ssim) + weights.mse * out.mse;
    return out;
}

}  // namespace wob
