#pragma once

#include <array>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "wob/nn/layers.hpp"

namespace wob::nn {

struct LayerSpec {
    bool transposed = false;
    int cin = 0;
    int cout = 0;
    int kernel = 0;
    int stride = 1;
    bool activation = true;  // LeakyReLU after the layer
    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Encoder then decoder; no activation after the last layer of either half.
inline const std::array<LayerSpec, 12>& autoencoder_table() {
    static const std::array<LayerSpec, 12> t{{
        {false, 3, 16, 6, 1, true},
        {false, 16, 32, 5, 2, true},
        {false, 32, 64, 6, 1, true},
        {false, 64, 128, 5, 2, true},
        {false, 128, 128, 5, 2, true},
        {false, 128, 128, 5, 1, false},
        {true, 128, 128, 5, 1, true},
        {true, 128, 128, 5, 2, true},
        {true, 128, 64, 5, 2, true},
        {true, 64, 32, 6, 1, true},
        {true, 32, 16, 5, 2, true},
        {true, 16, 3, 6, 1, false},
    }};
    return t;
}
inline constexpr std::size_t kEncoderLayers = 6;

inline std::size_t layer_param_count(const LayerSpec& l) {
    return std::size_t(l.cin) * l.cout * l.kernel * l.kernel + std::size_t(l.cout);
}

inline nlohmann::json table_to_json(const std::vector<LayerSpec>& t) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& l : t)
        a.push_back({{"type", l.transposed ? "conv_transpose2d" : "conv2d"}, {"in", l.cin}, {"out", l.cout},
                     {"kernel", l.kernel}, {"stride", l.stride}, {"leaky_relu", l.activation}});
    return a;
}

inline std::vector<LayerSpec> table_from_json(const nlohmann::json& a) {
    std::vector<LayerSpec> t;
    for (const auto& j : a) {
        const auto type = j.at("type").get<std::string>();
        if (type != "conv2d" && type != "conv_transpose2d") throw ConfigError("unknown layer type '" + type + "'");
        t.push_back({type == "conv_transpose2d", j.at("in").get<int>(), j.at("out").get<int>(), j.at("kernel").get<int>(),
                     j.at("stride").get<int>(), j.at("leaky_relu").get<bool>()});
    }
    return t;
}

struct ModelOptions {
    double leaky_slope = 0.01;
    bool clamp_output = true;
    /// Initial bias of the final layer; mid-range keeps early outputs inside
    /// the clamp where gradients flow.
    double output_bias = 0.5;
};

/// Stack of conv layers with LeakyReLU and an optional output clamp.
/// forward/backward take [C, N, H, W] tensors.
template <typename T>
class ConvStack {
public:
    explicit ConvStack(std::vector<LayerSpec> table = {autoencoder_table().begin(), autoencoder_table().end()},
                       ModelOptions opt = {}, std::size_t encoder_layers = kEncoderLayers)
        : table_(std::move(table)), opt_(opt), encoder_layers_(encoder_layers) {
        if (table_.empty()) throw ConfigError("model: empty layer table");
        for (std::size_t i = 0; i < table_.size(); ++i) {
            const auto& l = table_[i];
            if (i && l.cin != table_[i - 1].cout) throw ConfigError("model: channel mismatch at layer " + std::to_string(i));
            layers_.emplace_back(l.transposed, l.cin, l.cout, l.kernel, l.stride);
        }
    }

    const std::vector<LayerSpec>& table() const { return table_; }
    const ModelOptions& options() const { return opt_; }
    std::size_t encoder_layers() const { return encoder_layers_; }
    std::vector<ConvLayer<T>>& layers() { return layers_; }
    const std::vector<ConvLayer<T>>& layers() const { return layers_; }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += l.param_count();
        return n;
    }

    void init(std::uint64_t seed) {
        Rng rng(hash_combine(seed, 0x1417));
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            // He gain for layers feeding a LeakyReLU, unit gain otherwise.
            const double a = opt_.leaky_slope;
            const double gain = table_[i].activation ? std::sqrt(2.0 / (1.0 + a * a)) : 1.0;
            const bool last = i + 1 == layers_.size();
            layers_[i].init(rng, gain, last ? T(opt_.output_bias) : T(0));
        }
    }

    /// Spatial sizes through the stack for a square input.
    std::vector<int> trace_dims(int in) const {
        std::vector<int> d{in};
        for (const auto& l : layers_) d.push_back(l.out_dim(d.back()));
        return d;
    }

    Tensor<T> forward(const Tensor<T>& x) { return run(x, 0, layers_.size()); }
    Tensor<T> encode(const Tensor<T>& x) { return run(x, 0, encoder_layers_); }
    Tensor<T> decode(const Tensor<T>& z) { return run(z, encoder_layers_, layers_.size()); }

    /// Backpropagates d loss / d output of the last forward call through every
    /// layer it ran, filling the parameter gradients. Returns d loss / d input.
    Tensor<T> backward(Tensor<T> grad) {
        if (outputs_.empty()) throw ConfigError("model: backward without forward");
        const T slope = T(opt_.leaky_slope);
        for (std::size_t i = last_; i-- > first_;) {
            const std::size_t at = i - first_;
            if (i + 1 == layers_.size() && opt_.clamp_output) clamp01_backward(pre_clamp_, grad);
            if (table_[i].activation) leaky_relu_backward(outputs_[at], grad, slope);
            grad = layers_[i].backward(grad);
        }
        return grad;
    }

    /// Frees activations kept for backward (inference only).
    void release() {
        outputs_.clear();
        pre_clamp_ = {};
        for (auto& l : layers_) l.release();
    }

    /// Flat views over parameters and gradients, layer by layer (weight, bias).
    std::vector<std::span<T>> params() {
        std::vector<std::span<T>> out;
        for (auto& l : layers_) {
            out.emplace_back(l.weight());
            out.emplace_back(l.bias());
        }
        return out;
    }
    std::vector<std::span<T>> grads() {
        std::vector<std::span<T>> out;
        for (auto& l : layers_) {
            out.emplace_back(l.weight_grad());
            out.emplace_back(l.bias_grad());
        }
        return out;
    }

private:
    Tensor<T> run(const Tensor<T>& x, std::size_t first, std::size_t last) {
        first_ = first;
        last_ = last;
        outputs_.clear();
        const T slope = T(opt_.leaky_slope);
        Tensor<T> h = x;
        for (std::size_t i = first; i < last; ++i) {
            h = layers_[i].forward(h);
            if (table_[i].activation) leaky_relu_inplace(h, slope);
            if (i + 1 == layers_.size() && opt_.clamp_output) {
                pre_clamp_ = h;
                clamp01_inplace(h);
            }
            outputs_.push_back(h);
        }
        return h;
    }

    std::vector<LayerSpec> table_;
    ModelOptions opt_;
    std::size_t encoder_layers_;
    std::vector<ConvLayer<T>> layers_;
    std::vector<Tensor<T>> outputs_;
    Tensor<T> pre_clamp_;
    std::size_t first_ = 0, last_ = 0;
};

template <typename T>
using Autoencoder = ConvStack<T>;

}  // namespace wob::nn
