#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "wob/core/format.hpp"
#include "wob/eval/plot.hpp"
#include "wob/eval/precision.hpp"
#include "wob/nn/train.hpp"

namespace wob {

struct EvalConfig {
    std::vector<std::uint64_t> taus{1, 10, 50, 200};
    int curve_points = 101;  // quantile thresholds per curve
    std::vector<std::size_t> ks{10, 50, 100};
    std::size_t contact_k = 49;
    int batch_size = 64;

    void validate() const {
        if (taus.empty()) throw ConfigError("eval.taus must not be empty");
        for (std::size_t i = 0; i < taus.size(); ++i) {
            if (taus[i] < 1) throw ConfigError("eval.taus: every tau must be >= 1");
            if (i && taus[i] <= taus[i - 1]) throw ConfigError("eval.taus must be strictly increasing");
        }
        if (curve_points < 2) throw ConfigError("eval.curve_points must be >= 2");
        if (ks.empty()) throw ConfigError("eval.ks must not be empty");
        for (auto k : ks)
            if (k < 1) throw ConfigError("eval.ks: every k must be >= 1");
        if (batch_size < 1) throw ConfigError("eval.batch_size must be >= 1");
    }
};

/// Produces one anomaly score per frame of an episode.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual std::string name() const = 0;
    /// tagged holds the mask pixel count of every frame of the episode.
    virtual std::vector<double> score(EpisodeReader& r, const std::vector<std::uint64_t>& tagged) = 0;
    /// Score used when labelling at tau. Most scorers ignore tau.
    virtual double at_tau(double score, std::uint64_t /*tagged*/, std::uint64_t /*tau*/) const { return score; }
};

class ModelScorer : public Scorer {
public:
    ModelScorer(nn::ConvStack<float>& model, int batch) : model_(model), batch_(batch) {}
    std::string name() const override { return "model"; }
    std::vector<double> score(EpisodeReader& r, const std::vector<std::uint64_t>&) override {
        return nn::score_episode(model_, r, batch_);
    }

private:
    nn::ConvStack<float>& model_;
    int batch_;
};

/// Scores a frame by its true tagged-pixel count, zeroed at or below tau so
/// that score and label agree exactly: a self-check of the label pipeline.
class OracleScorer : public Scorer {
public:
    std::string name() const override { return "oracle"; }
    std::vector<double> score(EpisodeReader&, const std::vector<std::uint64_t>& tagged) override {
        return {tagged.begin(), tagged.end()};
    }
    double at_tau(double score, std::uint64_t tagged, std::uint64_t tau) const override {
        return label_count(tagged, tau) ? score : 0.0;
    }
};

class ConstantScorer : public Scorer {
public:
    explicit ConstantScorer(double value = 0.0) : value_(value) {}
    std::string name() const override { return "constant"; }
    std::vector<double> score(EpisodeReader& r, const std::vector<std::uint64_t>&) override {
        return std::vector<double>(r.size(), value_);
    }

private:
    double value_;
};

struct FrameRecord {
    BugKind kind{};
    std::string episode;  // directory relative to the data root
    std::uint64_t frame = 0;
    std::uint64_t tagged = 0;
    double score = 0;
};

struct TauReport {
    std::uint64_t tau = 0;
    std::size_t positives = 0;
    std::vector<CurvePoint> curve;
    std::vector<std::optional<double>> at_k;  // parallel to EvalConfig::ks
    std::optional<double> mean_positive, mean_negative;
};

struct EpisodeCurve {
    std::string episode;
    std::uint64_t tau = 0;
    std::size_t frames = 0, positives = 0;
    std::vector<CurvePoint> curve;  // at the kind's pooled thresholds
};

struct KindReport {
    BugKind kind{};
    std::size_t frames = 0;
    std::vector<TauReport> taus;  // parallel to EvalConfig::taus
    std::vector<EpisodeCurve> episodes;
};

struct EvalReport {
    std::string scorer;
    std::vector<FrameRecord> frames;  // sorted by (episode, frame)
    std::vector<KindReport> kinds;
    std::vector<TauReport> pooled;  // every kind together; curve omitted
    std::size_t normal_frames = 0;  // frames with an all-black mask
    std::optional<double> normal_p90;

    const KindReport& kind(BugKind k) const {
        for (const auto& r : kinds)
            if (r.kind == k) return r;
        throw ConfigError("no test split for bug kind " + std::string(to_string(k)));
    }
    const TauReport& at(BugKind k, std::uint64_t tau) const {
        for (const auto& t : kind(k).taus)
            if (t.tau == tau) return t;
        throw ConfigError("tau " + std::to_string(tau) + " was not evaluated");
    }
};

namespace eval_detail {

inline TauReport summarize(const std::vector<double>& scores, const std::vector<bool>& labels, std::uint64_t tau,
                           const EvalConfig& cfg, bool with_curve) {
    TauReport t;
    t.tau = tau;
    double sp = 0, sn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i]) ++t.positives, sp += scores[i];
        else sn += scores[i];
    }
    const std::size_t neg = scores.size() - t.positives;
    if (t.positives) t.mean_positive = sp / double(t.positives);
    if (neg) t.mean_negative = sn / double(neg);
    for (auto k : cfg.ks) t.at_k.push_back(precision_at_k(scores, labels, k));
    if (with_curve) t.curve = precision_curve(scores, labels, quantile_thresholds(scores, cfg.curve_points));
    return t;
}

inline std::string opt_real(const std::optional<double>& v) { return v ? format_real(*v) : "undefined"; }

inline std::ofstream open_csv(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    return out;
}

inline void close_csv(std::ofstream& out, const std::filesystem::path& p) {
    out.flush();
    if (!out) throw IoError("write failed: " + p.string());
}

}  // namespace eval_detail

/// Scores every test frame, labels it through its mask at each tau and builds
/// per-kind, per-episode and pooled precision tables.
inline EvalReport evaluate(const std::filesystem::path& root, Scorer& scorer, const EvalConfig& cfg) {
    using namespace eval_detail;
    cfg.validate();
    const Manifest m = load_manifest(root);
    if (m.test.empty()) throw DataIntegrityError(root.string() + ": dataset has no test partition");

    EvalReport rep;
    rep.scorer = scorer.name();
    std::map<BugKind, std::vector<std::size_t>> by_kind;  // indices into rep.frames
    for (const auto& [kind, entries] : m.test) {
        for (const auto& e : entries) {
            EpisodeReader r(root / e.dir);
            if (!r.meta().has_masks) throw DataIntegrityError((root / e.dir).string() + ": test episode has no masks");
            std::vector<std::uint64_t> tagged(r.size());
            for (std::uint64_t i = 0; i < r.size(); ++i) tagged[i] = r.mask(i).tagged_pixels();
            const auto s = scorer.score(r, tagged);
            if (s.size() != r.size()) throw DataIntegrityError(scorer.name() + " scorer returned the wrong number of scores");
            for (std::uint64_t i = 0; i < r.size(); ++i) rep.frames.push_back({kind, e.dir, i, tagged[i], s[i]});
        }
    }
    std::stable_sort(rep.frames.begin(), rep.frames.end(), [](const FrameRecord& a, const FrameRecord& b) {
        return a.episode != b.episode ? a.episode < b.episode : a.frame < b.frame;
    });
    std::vector<double> normal;
    for (std::size_t i = 0; i < rep.frames.size(); ++i) {
        by_kind[rep.frames[i].kind].push_back(i);
        if (rep.frames[i].tagged == 0) normal.push_back(rep.frames[i].score);
    }
    rep.normal_frames = normal.size();
    if (!normal.empty()) rep.normal_p90 = quantile(normal, 0.9);

    for (auto tau : cfg.taus) {
        std::vector<double> all_s;
        std::vector<bool> all_l;
        for (const auto& f : rep.frames) {
            all_s.push_back(scorer.at_tau(f.score, f.tagged, tau));
            all_l.push_back(label_count(f.tagged, tau));
        }
        rep.pooled.push_back(summarize(all_s, all_l, tau, cfg, false));
    }

    for (const auto& [kind, idx] : by_kind) {
        KindReport kr;
        kr.kind = kind;
        kr.frames = idx.size();
        for (auto tau : cfg.taus) {
            std::vector<double> s;
            std::vector<bool> l;
            for (auto i : idx) {
                s.push_back(scorer.at_tau(rep.frames[i].score, rep.frames[i].tagged, tau));
                l.push_back(label_count(rep.frames[i].tagged, tau));
            }
            kr.taus.push_back(summarize(s, l, tau, cfg, true));
            std::vector<double> thresholds;
            for (const auto& p : kr.taus.back().curve) thresholds.push_back(p.threshold);
            // Episodes are contiguous in idx because frames are sorted by episode.
            for (std::size_t a = 0; a < idx.size();) {
                std::size_t b = a;
                while (b < idx.size() && rep.frames[idx[b]].episode == rep.frames[idx[a]].episode) ++b;
                EpisodeCurve ec;
                ec.episode = rep.frames[idx[a]].episode;
                ec.tau = tau;
                ec.frames = b - a;
                const std::vector<double> es(s.begin() + std::ptrdiff_t(a), s.begin() + std::ptrdiff_t(b));
                const std::vector<bool> el(l.begin() + std::ptrdiff_t(a), l.begin() + std::ptrdiff_t(b));
                ec.positives = std::size_t(std::count(el.begin(), el.end(), true));
                ec.curve = precision_curve(es, el, thresholds);
                kr.episodes.push_back(std::move(ec));
                a = b;
            }
        }
        rep.kinds.push_back(std::move(kr));
    }
    return rep;
}

/// Writes <kind>.csv for every kind plus summary.csv, per_episode.csv,
/// scores.csv and a precision plot per kind under plots/.
inline void write_report(const EvalReport& rep, const EvalConfig& cfg, const std::filesystem::path& out) {
    using namespace eval_detail;
    std::error_code ec;
    std::filesystem::create_directories(out / "plots", ec);
    if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());

    const std::vector<Rgb> palette{{31, 119, 180}, {214, 39, 40}, {44, 160, 44}, {148, 103, 189}, {255, 127, 14}, {23, 190, 207}};
    for (const auto& kr : rep.kinds) {
        const std::string name(to_string(kr.kind));
        const auto path = out / (name + ".csv");
        auto csv = open_csv(path);
        csv << "bug_kind,tau,threshold,tp,fp,fn,precision\n";
        std::vector<PlotSeries> series;
        for (const auto& t : kr.taus) {
            PlotSeries ps;
            ps.color = palette[series.size() % palette.size()];
            for (std::size_t i = 0; i < t.curve.size(); ++i) {
                const auto& p = t.curve[i];
                csv << name << ',' << t.tau << ',' << format_real(p.threshold) << ',' << p.tp << ',' << p.fp << ',' << p.fn << ','
                    << opt_real(p.precision) << '\n';
                ps.x.push_back(t.curve.size() > 1 ? double(i) / double(t.curve.size() - 1) : 0.0);
                ps.y.push_back(p.precision.value_or(NAN));
            }
            series.push_back(std::move(ps));
        }
        close_csv(csv, path);
        write_ppm(out / "plots" / (name + ".ppm"), line_plot(series));
    }

    {
        const auto path = out / "summary.csv";
        auto csv = open_csv(path);
        csv << "bug_kind,tau,frames,positives";
        for (auto k : cfg.ks) csv << ",precision_at_" << k;
        csv << ",mean_positive_score,mean_negative_score,normal_p90\n";
        auto row = [&](const std::string& name, std::size_t frames, const TauReport& t) {
            csv << name << ',' << t.tau << ',' << frames << ',' << t.positives;
            for (const auto& v : t.at_k) csv << ',' << opt_real(v);
            csv << ',' << opt_real(t.mean_positive) << ',' << opt_real(t.mean_negative) << ',' << opt_real(rep.normal_p90) << '\n';
        };
        for (const auto& kr : rep.kinds)
            for (const auto& t : kr.taus) row(std::string(to_string(kr.kind)), kr.frames, t);
        for (const auto& t : rep.pooled) row("all", rep.frames.size(), t);
        close_csv(csv, path);
    }
    {
        const auto path = out / "per_episode.csv";
        auto csv = open_csv(path);
        csv << "bug_kind,episode,tau,frames,positives,threshold,tp,fp,fn,precision\n";
        for (const auto& kr : rep.kinds)
            for (const auto& e : kr.episodes)
                for (const auto& p : e.curve)
                    csv << to_string(kr.kind) << ',' << e.episode << ',' << e.tau << ',' << e.frames << ',' << e.positives << ','
                        << format_real(p.threshold) << ',' << p.tp << ',' << p.fp << ',' << p.fn << ',' << opt_real(p.precision) << '\n';
        close_csv(csv, path);
    }
    {
        const auto path = out / "scores.csv";
        auto csv = open_csv(path);
        csv << "bug_kind,episode,frame,tagged_pixels,score\n";
        for (const auto& f : rep.frames)
            csv << to_string(f.kind) << ',' << f.episode << ',' << f.frame << ',' << f.tagged << ',' << format_real(f.score) << '\n';
        close_csv(csv, path);
    }
}

/// Descending-score listing of every test frame (ties by episode, then frame)
/// in ranking.csv, with the top contact_k observations and their masks tiled
/// into top_frames.ppm and top_masks.ppm.
inline std::vector<std::size_t> rank_report(const EvalReport& rep, const EvalConfig& cfg, const std::filesystem::path& root,
                                            const std::filesystem::path& out) {
    using namespace eval_detail;
    std::vector<double> scores;
    for (const auto& f : rep.frames) scores.push_back(f.score);
    const auto order = rank_order(scores);

    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
    const auto path = out / "ranking.csv";
    auto csv = open_csv(path);
    csv << "rank,bug_kind,episode,frame,score,tagged_pixels";
    for (auto tau : cfg.taus) csv << ",bugged_tau" << tau;
    csv << '\n';
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto& f = rep.frames[order[r]];
        csv << r + 1 << ',' << to_string(f.kind) << ',' << f.episode << ',' << f.frame << ',' << format_real(f.score) << ',' << f.tagged;
        for (auto tau : cfg.taus) csv << ',' << int(label_count(f.tagged, tau));
        csv << '\n';
    }
    close_csv(csv, path);

    std::vector<RgbImage> frames, masks;
    std::map<std::string, std::unique_ptr<EpisodeReader>> readers;
    for (std::size_t r = 0; r < std::min(cfg.contact_k, order.size()); ++r) {
        const auto& f = rep.frames[order[r]];
        auto& rd = readers[f.episode];
        if (!rd) rd = std::make_unique<EpisodeReader>(root / f.episode);
        frames.push_back(rd->frame(f.frame).to_rgb());
        masks.push_back(rd->mask(f.frame).to_rgb());
    }
    const int cols = std::max(1, int(std::ceil(std::sqrt(double(frames.size())))));
    write_ppm(out / "top_frames.ppm", contact_sheet(frames, cols));
    write_ppm(out / "top_masks.ppm", contact_sheet(masks, cols));
    return order;
}

}  // namespace wob
