#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "wob/core/rng.hpp"
#include "wob/nn/tensor.hpp"

namespace wob::nn {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

namespace detail {

/// Unfolds k x k patches of a [C, N, H, W] image sampled on an oh x ow grid
/// with stride s. Row (c, ki, kj), column (n, oy, ox).
template <typename T>
void im2col(const T* x, int C, int N, int H, int W, int k, int s, int oh, int ow, T* col) {
    const std::size_t P = std::size_t(N) * oh * ow;
    for (int c = 0; c < C; ++c)
        for (int ki = 0; ki < k; ++ki)
            for (int kj = 0; kj < k; ++kj) {
                T* dst = col + (std::size_t(c * k + ki) * k + kj) * P;
                for (int n = 0; n < N; ++n) {
                    const T* img = x + (std::size_t(c) * N + n) * H * W;
                    for (int oy = 0; oy < oh; ++oy) {
                        const T* row = img + std::size_t(oy * s + ki) * W + kj;
                        if (s == 1) {
                            std::copy(row, row + ow, dst);
                            dst += ow;
                        } else {
                            for (int ox = 0; ox < ow; ++ox) *dst++ = row[ox * s];
                        }
                    }
                }
            }
}

/// Adjoint of im2col: accumulates columns back into a zeroed [C, N, H, W] image.
template <typename T>
void col2im(const T* col, int C, int N, int H, int W, int k, int s, int oh, int ow, T* x) {
    const std::size_t P = std::size_t(N) * oh * ow;
    std::fill(x, x + std::size_t(C) * N * H * W, T(0));
    for (int c = 0; c < C; ++c)
        for (int ki = 0; ki < k; ++ki)
            for (int kj = 0; kj < k; ++kj) {
                const T* src = col + (std::size_t(c * k + ki) * k + kj) * P;
                for (int n = 0; n < N; ++n) {
                    T* img = x + (std::size_t(c) * N + n) * H * W;
                    for (int oy = 0; oy < oh; ++oy) {
                        T* row = img + std::size_t(oy * s + ki) * W + kj;
                        for (int ox = 0; ox < ow; ++ox) row[ox * s] += *src++;
                    }
                }
            }
}

/// Column buffer shared by all layers of a thread; sized to the largest use.
template <typename T>
std::vector<T>& scratch(std::size_t n) {
    thread_local std::vector<T> buf;
    if (buf.size() < n) buf.resize(n);
    return buf;
}

}  // namespace detail

/// Valid (unpadded) convolution or transposed convolution.
/// Conv weights are [Cout, Cin, k, k]; transposed weights are [Cin, Cout, k, k].
template <typename T>
class ConvLayer {
public:
    ConvLayer(bool transposed, int cin, int cout, int k, int stride)
        : transposed_(transposed), cin_(cin), cout_(cout), k_(k), s_(stride),
          w_(std::size_t(cin) * cout * k * k), b_(std::size_t(cout)), gw_(w_.size()), gb_(b_.size()) {
        if (cin < 1 || cout < 1 || k < 1 || stride < 1) throw ConfigError("conv layer: sizes must be positive");
    }

    bool transposed() const { return transposed_; }
    int in_channels() const { return cin_; }
    int out_channels() const { return cout_; }
    int kernel() const { return k_; }
    int stride() const { return s_; }

    int out_dim(int in) const {
        if (transposed_) return (in - 1) * s_ + k_;
        if (in < k_) throw ConfigError("conv layer: input " + std::to_string(in) + " smaller than kernel " + std::to_string(k_));
        return (in - k_) / s_ + 1;
    }
    std::size_t param_count() const { return w_.size() + b_.size(); }
    /// Inputs feeding one output value, used for the initialisation scale.
    double fan_in() const {
        const double taps = double(cin_) * k_ * k_;
        return transposed_ ? std::max(1.0, taps / double(s_ * s_)) : taps;
    }

    std::vector<T>& weight() { return w_; }
    std::vector<T>& bias() { return b_; }
    const std::vector<T>& weight() const { return w_; }
    const std::vector<T>& bias() const { return b_; }
    std::vector<T>& weight_grad() { return gw_; }
    std::vector<T>& bias_grad() { return gb_; }

    /// Uniform fan-in init with the given gain; biases start at bias_value.
    void init(Rng& rng, double gain, T bias_value = T(0)) {
        const double bound = gain * std::sqrt(3.0 / fan_in());
        for (auto& v : w_) v = T(rng.uniform(-bound, bound));
        std::fill(b_.begin(), b_.end(), bias_value);
    }

    /// x is [Cin, N, H, W]. Keeps x for backward.
    Tensor<T> forward(const Tensor<T>& x) {
        check_input(x);
        input_ = x;
        const int N = x.dim(1), H = x.dim(2), W = x.dim(3);
        const int oh = out_dim(H), ow = out_dim(W);
        Tensor<T> y({cout_, N, oh, ow});
        const int K = taps();
        if (!transposed_) {
            const std::size_t P = std::size_t(N) * oh * ow;
            T* col = detail::scratch<T>(std::size_t(K) * P).data();
            detail::im2col(x.ptr(), cin_, N, H, W, k_, s_, oh, ow, col);
            MatMap<T> Y(y.ptr(), cout_, Eigen::Index(P));
            Y.noalias() = ConstMatMap<T>(w_.data(), cout_, K) * ConstMatMap<T>(col, K, Eigen::Index(P));
        } else {
            const std::size_t P = std::size_t(N) * H * W;
            T* col = detail::scratch<T>(std::size_t(K) * P).data();
            MatMap<T> C(col, K, Eigen::Index(P));
            C.noalias() = ConstMatMap<T>(w_.data(), cin_, K).transpose() * ConstMatMap<T>(x.ptr(), cin_, Eigen::Index(P));
            detail::col2im(col, cout_, N, oh, ow, k_, s_, H, W, y.ptr());
        }
        const std::size_t plane = std::size_t(N) * oh * ow;
        for (int c = 0; c < cout_; ++c) {
            T* p = y.ptr() + c * plane;
            for (std::size_t i = 0; i < plane; ++i) p[i] += b_[c];
        }
        return y;
    }

    /// dy matches the last forward output. Overwrites the parameter gradients
    /// and returns d loss / d input.
    Tensor<T> backward(const Tensor<T>& dy) {
        const Tensor<T>& x = input_;
        const int N = x.dim(1), H = x.dim(2), W = x.dim(3);
        const int oh = out_dim(H), ow = out_dim(W);
        if (dy.shape != std::vector<int>{cout_, N, oh, ow})
            throw ConfigError("conv backward: gradient shape " + shape_string(dy.shape) + " does not match output");
        const int K = taps();
        const std::size_t plane = std::size_t(N) * oh * ow;
        for (int c = 0; c < cout_; ++c) {
            const T* p = dy.ptr() + c * plane;
            T s = 0;
            for (std::size_t i = 0; i < plane; ++i) s += p[i];
            gb_[c] = s;
        }
        Tensor<T> dx(x.shape);
        if (!transposed_) {
            const std::size_t P = plane;
            T* col = detail::scratch<T>(std::size_t(K) * P).data();
            detail::im2col(x.ptr(), cin_, N, H, W, k_, s_, oh, ow, col);
            ConstMatMap<T> DY(dy.ptr(), cout_, Eigen::Index(P));
            MatMap<T>(gw_.data(), cout_, K).noalias() = DY * ConstMatMap<T>(col, K, Eigen::Index(P)).transpose();
            MatMap<T>(col, K, Eigen::Index(P)).noalias() = ConstMatMap<T>(w_.data(), cout_, K).transpose() * DY;
            detail::col2im(col, cin_, N, H, W, k_, s_, oh, ow, dx.ptr());
        } else {
            const std::size_t P = std::size_t(N) * H * W;
            T* col = detail::scratch<T>(std::size_t(K) * P).data();
            detail::im2col(dy.ptr(), cout_, N, oh, ow, k_, s_, H, W, col);
            ConstMatMap<T> DC(col, K, Eigen::Index(P));
            ConstMatMap<T> X(x.ptr(), cin_, Eigen::Index(P));
            MatMap<T>(gw_.data(), cin_, K).noalias() = X * DC.transpose();
            MatMap<T>(dx.ptr(), cin_, Eigen::Index(P)).noalias() = ConstMatMap<T>(w_.data(), cin_, K) * DC;
        }
        return dx;
    }

    /// Drops the cached input.
    void release() { input_ = {}; }

private:
    int taps() const { return (transposed_ ? cout_ : cin_) * k_ * k_; }
    void check_input(const Tensor<T>& x) const {
        if (x.shape.size() != 4 || x.shape[0] != cin_)
            throw ConfigError("conv layer: expected [" + std::to_string(cin_) + ",N,H,W] input, got " + shape_string(x.shape));
    }

    bool transposed_;
    int cin_, cout_, k_, s_;
    std::vector<T> w_, b_, gw_, gb_;
    Tensor<T> input_;
};

template <typename T>
void leaky_relu_inplace(Tensor<T>& x, T slope) {
    for (auto& v : x.data)
        if (v < T(0)) v *= slope;
}

/// Gradient through LeakyReLU given the activation output (same sign as its input).
template <typename T>
void leaky_relu_backward(const Tensor<T>& out, Tensor<T>& grad, T slope) {
    for (std::size_t i = 0; i < grad.size(); ++i)
        if (out.data[i] < T(0)) grad.data[i] *= slope;
}

template <typename T>
void clamp01_inplace(Tensor<T>& x) {
    for (auto& v : x.data) v = std::clamp(v, T(0), T(1));
}

/// Gradient through clamp to [0, 1] given the pre-clamp values.
template <typename T>
void clamp01_backward(const Tensor<T>& pre, Tensor<T>& grad) {
    for (std::size_t i = 0; i < grad.size(); ++i)
        if (pre.data[i] < T(0) || pre.data[i] > T(1)) grad.data[i] = T(0);
}

}  // namespace wob::nn
