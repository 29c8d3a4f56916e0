#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "wob/core/format.hpp"
#include "wob/dataset/manifest.hpp"
#include "wob/metrics/loss.hpp"
#include "wob/nn/adam.hpp"
#include "wob/nn/checkpoint.hpp"

namespace wob::nn {

inline constexpr Shape3 kFrameShape{3, kFrameHeight, kFrameWidth};

/// Random access to frames spread over episode directories. Frames are read
/// from disk on demand.
class FrameSource {
public:
    struct Ref {
        std::uint32_t episode = 0;
        std::uint64_t frame = 0;
    };

    FrameSource() = default;
    explicit FrameSource(const std::vector<std::filesystem::path>& episodes) {
        for (const auto& d : episodes) add(d);
    }

    void add(const std::filesystem::path& dir) {
        readers_.push_back(std::make_unique<EpisodeReader>(dir));
        const auto& m = readers_.back()->meta();
        if (m.width != kFrameWidth || m.height != kFrameHeight)
            throw DataIntegrityError(dir.string() + ": frames are not " + std::to_string(kFrameWidth) + "x" + std::to_string(kFrameHeight));
        for (std::uint64_t i = 0; i < m.frame_count; ++i) refs_.push_back({std::uint32_t(readers_.size() - 1), i});
    }
    /// Keeps only the first n frames.
    void truncate(std::size_t n) {
        if (n < refs_.size()) refs_.resize(n);
    }

    std::size_t size() const { return refs_.size(); }
    const Ref& ref(std::size_t i) const { return refs_.at(i); }
    EpisodeReader& reader(std::size_t e) { return *readers_.at(e); }
    std::size_t episodes() const { return readers_.size(); }

    void bytes(std::size_t i, std::vector<std::uint8_t>& out) {
        const auto& r = refs_.at(i);
        readers_[r.episode]->frame_bytes(r.frame, out);
    }

private:
    std::vector<std::unique_ptr<EpisodeReader>> readers_;
    std::vector<Ref> refs_;
};

/// Episode directories of one partition listed in a dataset manifest.
inline std::vector<std::filesystem::path> partition_dirs(const std::filesystem::path& root, Partition p,
                                                         std::optional<BugKind> kind = {}) {
    const Manifest m = load_manifest(root);
    std::vector<std::filesystem::path> out;
    auto add = [&](const std::vector<ManifestEntry>& es) {
        for (const auto& e : es) out.push_back(root / e.dir);
    };
    if (p == Partition::Normal) add(m.normal);
    else if (p == Partition::Bugged) add(m.bugged);
    else
        for (const auto& [k, es] : m.test)
            if (!kind || *kind == k) add(es);
    return out;
}

/// Converts uint8 frames (each C x H x W) into a [C, N, H, W] tensor in [0, 1].
inline Tensor<float> frames_to_tensor(const std::vector<const std::uint8_t*>& frames, Shape3 s = kFrameShape) {
    const int n = int(frames.size());
    Tensor<float> t({s.c, n, s.h, s.w});
    const std::size_t plane = std::size_t(s.h) * s.w;
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < s.c; ++c) {
            const std::uint8_t* src = frames[i] + c * plane;
            float* dst = t.ptr() + (std::size_t(c) * n + i) * plane;
            for (std::size_t p = 0; p < plane; ++p) dst[p] = float(src[p]) / 255.0f;
        }
    return t;
}

struct TrainConfig {
    int epochs = 5;
    int batch_size = 64;
    std::uint64_t seed = 0;
    LossWeights loss;
    SsimConfig ssim;
    AdamConfig adam;
    ModelOptions model;
    double grad_clip = 0.0;  // global L2 norm; 0 disables
    std::size_t max_frames = 0;  // 0 = all

    void validate() const {
        if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
        if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
        if (!(grad_clip >= 0)) throw ConfigError("train.grad_clip must be non-negative");
        if (!(model.leaky_slope >= 0 && model.leaky_slope < 1)) throw ConfigError("train.leaky_slope must be in [0, 1)");
        loss.validate();
        ssim.validate();
        adam.validate();
    }
};

struct BatchLog {
    int epoch = 0;
    std::size_t batch = 0;
    LossValue value;
};

struct TrainResult {
    std::vector<double> epoch_loss;  // frame-weighted mean per epoch
    std::vector<BatchLog> batches;
};

/// Fisher-Yates order for one epoch, keyed by (seed, epoch).
inline std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t(0));
    Rng rng(hash_combine(seed, 0xe90c, std::uint64_t(epoch)));
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    return idx;
}

/// One optimisation step on a [C, N, H, W] batch; returns the batch loss.
inline LossValue train_step(ConvStack<float>& model, Adam<float>& opt, const Tensor<float>& batch, const TrainConfig& cfg) {
    const Tensor<float> recon = swap_batch_channel(model.forward(batch));
    const Tensor<float> target = swap_batch_channel(batch);
    const std::size_t n = std::size_t(batch.dim(1));
    const Shape3 s{batch.dim(0), batch.dim(2), batch.dim(3)};
    Tensor<float> grad(recon.shape);
    const LossValue v = combined_loss<float>(recon.data, target.data, n, s, cfg.loss, cfg.ssim, grad.data);
    if (!std::isfinite(v.loss)) throw DataIntegrityError("training diverged: non-finite loss");
    model.backward(swap_batch_channel(grad));
    auto grads = model.grads();
    if (cfg.grad_clip > 0) clip_grad_norm(grads, cfg.grad_clip);
    opt.step(model.params(), grads);
    return v;
}

using TrainProgress = std::function<void(const BatchLog&)>;

/// Trains on every frame of source. When out_dir is set, writes loss.csv
/// (epoch,batch,loss,ssim,mse), epoch_<e>.ckpt after each epoch and model.ckpt
/// at the end.
inline TrainResult train(ConvStack<float>& model, FrameSource& source, const TrainConfig& cfg,
                         const std::optional<std::filesystem::path>& out_dir = {}, const TrainProgress& progress = {}) {
    cfg.validate();
    const std::size_t n = cfg.max_frames ? std::min(cfg.max_frames, source.size()) : source.size();
    if (n == 0) throw DataIntegrityError("train: empty dataset");
    Adam<float> opt(cfg.adam);
    std::ofstream csv;
    if (out_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*out_dir, ec);
        if (ec) throw IoError("cannot create " + out_dir->string() + ": " + ec.message());
        csv.open(*out_dir / "loss.csv", std::ios::trunc);
        if (!csv) throw IoError("cannot write " + (*out_dir / "loss.csv").string());
        csv << "epoch,batch,loss,ssim,mse\n";
    }
    const nlohmann::json extra = {{"seed", cfg.seed}, {"epochs", cfg.epochs}, {"batch_size", cfg.batch_size}, {"frames", n}};

    TrainResult result;
    std::vector<std::vector<std::uint8_t>> buf(std::size_t(cfg.batch_size));
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto order = epoch_order(n, cfg.seed, epoch);
        double sum = 0;
        for (std::size_t start = 0, b = 0; start < n; start += std::size_t(cfg.batch_size), ++b) {
            const std::size_t end = std::min(n, start + std::size_t(cfg.batch_size));
            std::vector<const std::uint8_t*> ptrs;
            for (std::size_t i = start; i < end; ++i) {
                source.bytes(order[i], buf[i - start]);
                ptrs.push_back(buf[i - start].data());
            }
            const LossValue v = train_step(model, opt, frames_to_tensor(ptrs), cfg);
            sum += v.loss * double(end - start);
            BatchLog log{epoch, b, v};
            result.batches.push_back(log);
            if (csv.is_open())
                csv << epoch << ',' << b << ',' << format_real(v.loss) << ',' << format_real(v.ssim) << ',' << format_real(v.mse) << '\n';
            if (progress) progress(log);
        }
        result.epoch_loss.push_back(sum / double(n));
        if (out_dir) {
            csv.flush();
            auto e = extra;
            e["epoch"] = epoch;
            e["epoch_loss"] = result.epoch_loss.back();
            save_checkpoint(*out_dir / ("epoch_" + std::to_string(epoch) + ".ckpt"), model, e);
        }
    }
    model.release();
    if (out_dir) {
        auto e = extra;
        e["epoch"] = cfg.epochs;
        e["epoch_loss"] = result.epoch_loss;
        save_checkpoint(*out_dir / "model.ckpt", model, e);
        if (!csv) throw IoError("write failed: " + (*out_dir / "loss.csv").string());
    }
    return result;
}

/// Squared L2 reconstruction error of each image in a [C, N, H, W] batch.
inline std::vector<double> score_batch(ConvStack<float>& model, const Tensor<float>& batch) {
    const Tensor<float> recon = model.forward(batch);
    model.release();
    const int c = batch.dim(0), n = batch.dim(1);
    const std::size_t plane = std::size_t(batch.dim(2)) * batch.dim(3);
    std::vector<double> out(std::size_t(n), 0.0);
    for (int ch = 0; ch < c; ++ch)
        for (int i = 0; i < n; ++i) {
            const std::size_t off = (std::size_t(ch) * n + i) * plane;
            double s = 0;
            for (std::size_t p = 0; p < plane; ++p) {
                const double d = double(batch.data[off + p]) - double(recon.data[off + p]);
                s += d * d;
            }
            out[std::size_t(i)] += s;
        }
    return out;
}

/// Anomaly score of a single uint8 frame (C x H x W).
inline double score_frame(ConvStack<float>& model, const Frame& f) {
    if (f.width != kFrameWidth || f.height != kFrameHeight) throw ConfigError("score: frame must be 84x84");
    return score_batch(model, frames_to_tensor({f.data.data()}))[0];
}

/// Scores every frame of an episode in order.
inline std::vector<double> score_episode(ConvStack<float>& model, EpisodeReader& r, int batch = 64) {
    std::vector<double> out;
    out.reserve(r.size());
    std::vector<std::vector<std::uint8_t>> buf(static_cast<std::size_t>(batch));
    for (std::uint64_t start = 0; start < r.size(); start += std::uint64_t(batch)) {
        const std::uint64_t end = std::min<std::uint64_t>(r.size(), start + std::uint64_t(batch));
        std::vector<const std::uint8_t*> ptrs;
        for (std::uint64_t i = start; i < end; ++i) {
            r.frame_bytes(i, buf[i - start]);
            ptrs.push_back(buf[i - start].data());
        }
        const auto s = score_batch(model, frames_to_tensor(ptrs));
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

}  // namespace wob::nn
