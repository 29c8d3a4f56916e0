#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wob/eval/evaluate.hpp"

namespace wob {

/// Everything a CLI run depends on. Loaded from an optional JSON file, then
/// overridden by flags, validated as a whole and persisted next to outputs.
struct RunConfig {
    std::filesystem::path scene = std::filesystem::path(WOB_DATA_DIR) / "scenes" / "default.json";
    std::uint64_t seed = 0;
    AgentConfig agent;
    std::vector<BugRequest> bugs;  // demo schedule
    std::uint64_t window_length = 50;
    double duty_cycle = 0.2;
    bool attract = true;
    DatasetConfig dataset;
    nn::TrainConfig train;
    EvalConfig eval;

    DatasetConfig dataset_config() const {
        DatasetConfig d = dataset;
        d.seed = seed;
        d.agent = agent;
        d.window_length = window_length;
        d.duty_cycle = duty_cycle;
        d.attract = attract;
        return d;
    }
    nn::TrainConfig train_config() const {
        nn::TrainConfig t = train;
        t.seed = seed;
        return t;
    }

    void validate() const {
        agent.validate();
        dataset_config().validate();
        train_config().validate();
        eval.validate();
        for (const auto& b : bugs) validate_params(b.kind, b.params);
    }
};

namespace config_detail {

using json = nlohmann::json;

template <typename T>
T get(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(key + ": wrong type");
    }
}

inline void object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

[[noreturn]] inline void unknown(const std::string& where, const std::string& key) {
    throw ConfigError(where + ": unknown field '" + key + "'");
}

inline SsimWindow parse_window(const std::string& s) {
    if (s == "gaussian") return SsimWindow::Gaussian;
    if (s == "uniform") return SsimWindow::Uniform;
    throw ConfigError("train.ssim_window_kind must be 'gaussian' or 'uniform'");
}

}  // namespace config_detail

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json bugs = nlohmann::json::array();
    for (const auto& b : c.bugs) {
        nlohmann::json e = {{"kind", to_string(b.kind)}, {"params", params_to_json(b.kind, b.params)}};
        if (b.target) e["target"] = *b.target;
        bugs.push_back(e);
    }
    const auto& d = c.dataset;
    const auto& t = c.train;
    return {
        {"scene", c.scene.string()},
        {"seed", c.seed},
        {"agent", to_json(c.agent)},
        {"bugs", bugs},
        {"schedule", {{"window_length", c.window_length}, {"duty_cycle", c.duty_cycle}, {"attract", c.attract}}},
        {"dataset",
         {{"scale", d.scale},
          {"normal_frames", d.normal_frames},
          {"bugged_frames", d.bugged_frames},
          {"test_frames_per_kind", d.test_frames_per_kind},
          {"episode_length", d.episode_length},
          {"test_episode_length", d.test_episode_length},
          {"min_bugs_per_episode", d.min_bugs_per_episode},
          {"max_bugs_per_episode", d.max_bugs_per_episode}}},
        {"train",
         {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"max_frames", t.max_frames},
          {"learning_rate", t.adam.lr},
          {"beta1", t.adam.beta1},
          {"beta2", t.adam.beta2},
          {"adam_eps", t.adam.eps},
          {"weight_decay", t.adam.weight_decay},
          {"ssim_weight", t.loss.ssim},
          {"mse_weight", t.loss.mse},
          {"ssim_window", t.ssim.window},
          {"ssim_sigma", t.ssim.sigma},
          {"ssim_window_kind", t.ssim.kind == SsimWindow::Gaussian ? "gaussian" : "uniform"},
          {"leaky_slope", t.model.leaky_slope},
          {"grad_clip", t.grad_clip}}},
        {"eval",
         {{"taus", c.eval.taus},
          {"curve_points", c.eval.curve_points},
          {"ks", c.eval.ks},
          {"contact_k", c.eval.contact_k},
          {"batch_size", c.eval.batch_size}}},
    };
}

/// Applies the fields present in j on top of c. Unknown fields are errors.
inline RunConfig run_config_from_json(const nlohmann::json& j, RunConfig c = {}) {
    using namespace config_detail;
    object(j, "config");
    for (const auto& [k, v] : j.items()) {
        if (k == "scene") c.scene = get<std::string>(v, k);
        else if (k == "seed") c.seed = get<std::uint64_t>(v, k);
        else if (k == "agent") c.agent = agent_config_from_json(v, c.agent);
        else if (k == "bugs") {
            if (!v.is_array()) throw ConfigError("bugs: expected an array");
            c.bugs.clear();
            for (const auto& b : v) {
                object(b, "bugs[]");
                BugRequest r;
                r.kind = bug_kind_or_throw(get<std::string>(b.value("kind", json()), "bugs[].kind"));
                for (const auto& [bk, bv] : b.items()) {
                    if (bk == "kind") continue;
                    if (bk == "target") r.target = get<std::string>(bv, "bugs[].target");
                    else if (bk == "params") r.params = params_from_json(r.kind, bv);
                    else unknown("bugs[]", bk);
                }
                c.bugs.push_back(r);
            }
        } else if (k == "schedule") {
            object(v, k);
            for (const auto& [sk, sv] : v.items()) {
                if (sk == "window_length") c.window_length = get<std::uint64_t>(sv, "schedule." + sk);
                else if (sk == "duty_cycle") c.duty_cycle = get<double>(sv, "schedule." + sk);
                else if (sk == "attract") c.attract = get<bool>(sv, "schedule." + sk);
                else unknown(k, sk);
            }
        } else if (k == "dataset") {
            object(v, k);
            auto& d = c.dataset;
            for (const auto& [dk, dv] : v.items()) {
                const std::string key = "dataset." + dk;
                if (dk == "scale") d.scale = get<double>(dv, key);
                else if (dk == "normal_frames") d.normal_frames = get<std::uint64_t>(dv, key);
                else if (dk == "bugged_frames") d.bugged_frames = get<std::uint64_t>(dv, key);
                else if (dk == "test_frames_per_kind") d.test_frames_per_kind = get<std::uint64_t>(dv, key);
                else if (dk == "episode_length") d.episode_length = get<std::uint64_t>(dv, key);
                else if (dk == "test_episode_length") d.test_episode_length = get<std::uint64_t>(dv, key);
                else if (dk == "min_bugs_per_episode") d.min_bugs_per_episode = get<int>(dv, key);
                else if (dk == "max_bugs_per_episode") d.max_bugs_per_episode = get<int>(dv, key);
                else unknown(k, dk);
            }
        } else if (k == "train") {
            object(v, k);
            auto& t = c.train;
            for (const auto& [tk, tv] : v.items()) {
                const std::string key = "train." + tk;
                if (tk == "epochs") t.epochs = get<int>(tv, key);
                else if (tk == "batch_size") t.batch_size = get<int>(tv, key);
                else if (tk == "max_frames") t.max_frames = get<std::size_t>(tv, key);
                else if (tk == "learning_rate") t.adam.lr = get<double>(tv, key);
                else if (tk == "beta1") t.adam.beta1 = get<double>(tv, key);
                else if (tk == "beta2") t.adam.beta2 = get<double>(tv, key);
                else if (tk == "adam_eps") t.adam.eps = get<double>(tv, key);
                else if (tk == "weight_decay") t.adam.weight_decay = get<double>(tv, key);
                else if (tk == "ssim_weight") t.loss.ssim = get<double>(tv, key);
                else if (tk == "mse_weight") t.loss.mse = get<double>(tv, key);
                else if (tk == "ssim_window") t.ssim.window = get<int>(tv, key);
                else if (tk == "ssim_sigma") t.ssim.sigma = get<double>(tv, key);
                else if (tk == "ssim_window_kind") t.ssim.kind = parse_window(get<std::string>(tv, key));
                else if (tk == "leaky_slope") t.model.leaky_slope = get<double>(tv, key);
                else if (tk == "grad_clip") t.grad_clip = get<double>(tv, key);
                else unknown(k, tk);
            }
        } else if (k == "eval") {
            object(v, k);
            auto& e = c.eval;
            for (const auto& [ek, ev] : v.items()) {
                const std::string key = "eval." + ek;
                if (ek == "taus") e.taus = get<std::vector<std::uint64_t>>(ev, key);
                else if (ek == "curve_points") e.curve_points = get<int>(ev, key);
                else if (ek == "ks") e.ks = get<std::vector<std::size_t>>(ev, key);
                else if (ek == "contact_k") e.contact_k = get<std::size_t>(ev, key);
                else if (ek == "batch_size") e.batch_size = get<int>(ev, key);
                else unknown(k, ek);
            }
        } else {
            unknown("config", k);
        }
    }
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = read_json_file(path);
    } catch (const DataIntegrityError& e) {
        throw ConfigError(e.what());
    }
    RunConfig c = run_config_from_json(j);
    // A relative scene path is relative to the config file.
    if (j.contains("scene") && c.scene.is_relative()) c.scene = path.parent_path() / c.scene;
    return c;
}

/// "kind[:target][,kind[:target]...]"
inline std::vector<BugRequest> parse_bug_list(const std::string& s) {
    std::vector<BugRequest> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        const std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (item.empty()) throw ConfigError("--bug: empty entry in '" + s + "'");
        BugRequest r;
        const auto colon = item.find(':');
        r.kind = bug_kind_or_throw(item.substr(0, colon));
        if (colon != std::string::npos) {
            r.target = item.substr(colon + 1);
            if (r.target->empty()) throw ConfigError("--bug: empty target in '" + item + "'");
        }
        for (const auto& b : out)
            if (b.kind == r.kind) throw ConfigError("--bug: " + std::string(to_string(r.kind)) + " given twice");
        out.push_back(r);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

/// "1,10,50" -> {1, 10, 50}
inline std::vector<std::uint64_t> parse_u64_list(const std::string& s, const std::string& flag) {
    std::vector<std::uint64_t> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        const std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        char* end = nullptr;
        errno = 0;
        const unsigned long long v = std::strtoull(item.c_str(), &end, 10);
        if (item.empty() || *end != '\0' || errno || item[0] == '-') throw ConfigError(flag + ": '" + item + "' is not a non-negative integer");
        out.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

}  // namespace wob
