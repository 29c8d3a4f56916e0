#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "wob/core/error.hpp"

namespace wob::nn {

/// Dense row-major tensor. Activations inside the network use the
/// channel-major batch layout [C, N, H, W], so a layer output is one matrix
/// with a row per channel.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s, T fill = T(0)) : shape(std::move(s)), data(count(shape), fill) {}

    static std::size_t count(const std::vector<int>& s) {
        return std::accumulate(s.begin(), s.end(), std::size_t(1), [](std::size_t a, int b) { return a * std::size_t(b); });
    }
    std::size_t size() const { return data.size(); }
    int dim(std::size_t i) const { return shape.at(i); }
    T* ptr() { return data.data(); }
    const T* ptr() const { return data.data(); }

    bool all_finite() const {
        for (const T& v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

inline std::string shape_string(const std::vector<int>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out + "]";
}

/// [N, C, H, W] -> [C, N, H, W] (and back; the permutation is its own inverse).
template <typename T>
Tensor<T> swap_batch_channel(const Tensor<T>& x) {
    if (x.shape.size() != 4) throw ConfigError("swap_batch_channel: expected a 4-d tensor, got " + shape_string(x.shape));
    const int a = x.shape[0], b = x.shape[1];
    const std::size_t plane = std::size_t(x.shape[2]) * x.shape[3];
    Tensor<T> out({b, a, x.shape[2], x.shape[3]});
    for (int i = 0; i < a; ++i)
        for (int j = 0; j < b; ++j) {
            const T* src = x.ptr() + (std::size_t(i) * b + j) * plane;
            std::copy(src, src + plane, out.ptr() + (std::size_t(j) * a + i) * plane);
        }
    return out;
}

}  // namespace wob::nn
