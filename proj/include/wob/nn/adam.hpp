#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "wob/core/error.hpp"

namespace wob::nn {

struct AdamConfig {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;

    void validate() const {
        if (!(lr > 0)) throw ConfigError("adam.lr must be positive");
        if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) throw ConfigError("adam betas must be in [0, 1)");
        if (!(eps > 0)) throw ConfigError("adam.eps must be positive");
        if (!(weight_decay >= 0)) throw ConfigError("adam.weight_decay must be non-negative");
    }
};

template <typename T>
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

    const AdamConfig& config() const { return cfg_; }
    std::uint64_t steps() const { return t_; }
    const std::vector<std::vector<T>>& first_moment() const { return m_; }
    const std::vector<std::vector<T>>& second_moment() const { return v_; }

    /// One bias-corrected update. Throws before touching anything when a
    /// gradient is not finite.
    void step(const std::vector<std::span<T>>& params, const std::vector<std::span<T>>& grads) {
        if (params.size() != grads.size()) throw ConfigError("adam: parameter and gradient lists differ");
        for (std::size_t i = 0; i < grads.size(); ++i) {
            if (grads[i].size() != params[i].size()) throw ConfigError("adam: gradient " + std::to_string(i) + " has the wrong size");
            for (std::size_t j = 0; j < grads[i].size(); ++j)
                if (!std::isfinite(grads[i][j]))
                    throw DataIntegrityError("adam: non-finite gradient in tensor " + std::to_string(i) + " at " +
                                             std::to_string(j) + " (step " + std::to_string(t_ + 1) + ")");
        }
        if (m_.empty()) {
            for (const auto& p : params) {
                m_.emplace_back(p.size(), T(0));
                v_.emplace_back(p.size(), T(0));
            }
        } else if (m_.size() != params.size()) {
            throw ConfigError("adam: parameter list changed between steps");
        }
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, double(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, double(t_));
        const T b1 = T(cfg_.beta1), b2 = T(cfg_.beta2);
        const T lr1 = T(cfg_.lr / c1), inv_c2 = T(1.0 / c2), eps = T(cfg_.eps), wd = T(cfg_.weight_decay);
        for (std::size_t i = 0; i < params.size(); ++i) {
            T* p = params[i].data();
            const T* g = grads[i].data();
            T* m = m_[i].data();
            T* v = v_[i].data();
            for (std::size_t j = 0, n = params[i].size(); j < n; ++j) {
                const T gj = g[j] + wd * p[j];
                m[j] = b1 * m[j] + (T(1) - b1) * gj;
                v[j] = b2 * v[j] + (T(1) - b2) * gj * gj;
                p[j] -= lr1 * m[j] / (std::sqrt(v[j] * inv_c2) + eps);
            }
        }
    }

private:
    AdamConfig cfg_;
    std::uint64_t t_ = 0;
    std::vector<std::vector<T>> m_, v_;
};

/// Scales gradients so their global L2 norm is at most max_norm; returns the
/// norm before scaling.
template <typename T>
double clip_grad_norm(const std::vector<std::span<T>>& grads, double max_norm) {
    double ss = 0;
    for (const auto& g : grads)
        for (T v : g) ss += double(v) * double(v);
    const double norm = std::sqrt(ss);
    if (max_norm > 0 && norm > max_norm) {
        const T k = T(max_norm / norm);
        for (const auto& g : grads)
            for (T& v : g) v *= k;
    }
    return norm;
}

}  // namespace wob::nn
