#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "wob/core/error.hpp"
#include "wob/core/image.hpp"

namespace wob {

/// A frame counts as bugged when its mask has strictly more than tau tagged pixels.
inline bool label_frame(const MaskFrame& mask, std::uint64_t tau) { return mask.tagged_pixels() > tau; }
inline bool label_count(std::uint64_t tagged, std::uint64_t tau) { return tagged > tau; }

struct CurvePoint {
    double threshold = 0;
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    /// TP / (TP + FP); empty when nothing is classified positive.
    std::optional<double> precision;
};

inline std::optional<double> precision_of(std::uint64_t tp, std::uint64_t fp) {
    if (tp + fp == 0) return std::nullopt;
    return double(tp) / double(tp + fp);
}

/// Classifies score > t as bugged for every threshold t.
inline std::vector<CurvePoint> precision_curve(const std::vector<double>& scores, const std::vector<bool>& labels,
                                               const std::vector<double>& thresholds) {
    if (scores.size() != labels.size()) throw ConfigError("precision_curve: scores and labels differ in length");
    if (!std::is_sorted(thresholds.begin(), thresholds.end())) throw ConfigError("precision_curve: thresholds must be sorted");
    std::vector<CurvePoint> out;
    out.reserve(thresholds.size());
    for (double t : thresholds) {
        CurvePoint p;
        p.threshold = t;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const bool pred = scores[i] > t;
            if (pred && labels[i]) ++p.tp;
            else if (pred) ++p.fp;
            else if (labels[i]) ++p.fn;
            else ++p.tn;
        }
        p.precision = precision_of(p.tp, p.fp);
        out.push_back(p);
    }
    return out;
}

/// Descending score; ties by ascending key (e.g. (episode, frame) position).
inline std::vector<std::size_t> rank_order(const std::vector<double>& scores) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t(0));
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return idx;
}

/// Fraction of positives among the k highest-scored frames (k capped at n).
inline std::optional<double> precision_at_k(const std::vector<double>& scores, const std::vector<bool>& labels, std::size_t k) {
    if (scores.size() != labels.size()) throw ConfigError("precision_at_k: scores and labels differ in length");
    const auto order = rank_order(scores);
    const std::size_t n = std::min(k, order.size());
    if (n == 0) return std::nullopt;
    std::size_t tp = 0;
    for (std::size_t i = 0; i < n; ++i) tp += labels[order[i]];
    return double(tp) / double(n);
}

/// Nearest-rank quantile of unsorted values, q in [0, 1].
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw ConfigError("quantile of an empty set");
    std::sort(v.begin(), v.end());
    const double pos = q * double(v.size() - 1);
    return v[std::size_t(std::llround(pos))];
}

/// Decision thresholds at evenly spaced quantiles of the scores, deduplicated.
/// The lowest quantile is lowered just below the minimum so every frame is
/// classified positive at the first threshold.
inline std::vector<double> quantile_thresholds(const std::vector<double>& scores, int points) {
    if (points < 2) throw ConfigError("eval.curve_points must be >= 2");
    if (scores.empty()) return {};
    std::vector<double> s = scores;
    std::sort(s.begin(), s.end());
    std::vector<double> out;
    for (int i = 0; i < points; ++i) {
        const double pos = double(i) / double(points - 1) * double(s.size() - 1);
        out.push_back(s[std::size_t(std::llround(pos))]);
    }
    out.front() = std::nextafter(s.front(), -INFINITY);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace wob
