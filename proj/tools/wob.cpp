// Command-line entry point: demo, generate, train, score, evaluate, coverage.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "wob/agent/coverage.hpp"
#include "wob/cli/run_config.hpp"

namespace fs = std::filesystem;
using namespace wob;

namespace {

// Flag values land here first, then override the config file.
struct Flags {
    std::string config;
    std::optional<std::string> scene;
    std::optional<std::uint64_t> seed;
    std::optional<double> scale;
    std::optional<int> epochs, batch_size;
    std::optional<std::size_t> max_frames;
    std::optional<double> lr;
    std::optional<std::string> taus;
    std::optional<int> curve_points;
    std::optional<std::size_t> contact_k;
    std::optional<std::string> bug;
    std::optional<std::uint64_t> window;
};

RunConfig resolve(const Flags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
    if (f.scene) c.scene = *f.scene;
    if (f.seed) c.seed = *f.seed;
    if (f.scale) c.dataset.scale = *f.scale;
    if (f.epochs) c.train.epochs = *f.epochs;
    if (f.batch_size) c.train.batch_size = *f.batch_size;
    if (f.max_frames) c.train.max_frames = *f.max_frames;
    if (f.lr) c.train.adam.lr = *f.lr;
    if (f.taus) c.eval.taus = parse_u64_list(*f.taus, "--taus");
    if (f.curve_points) c.eval.curve_points = *f.curve_points;
    if (f.contact_k) c.eval.contact_k = *f.contact_k;
    if (f.bug) c.bugs = parse_bug_list(*f.bug);
    if (f.window) c.window_length = *f.window;
    c.validate();
    return c;
}

void make_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create " + p.string() + ": " + ec.message());
}

// Provenance snapshot; output locations are left out so that two runs that
// differ only in where they write produce the same file.
void write_resolved(const fs::path& dir, const std::string& command, const RunConfig& c, const nlohmann::json& inputs = nlohmann::json::object()) {
    make_dir(dir);
    write_json_file(dir / "resolved_config.json", {{"command", command}, {"config", to_json(c)}, {"inputs", inputs}});
}

std::string default_data_root() {
    const char* env = std::getenv("WOB_DATA_ROOT");
    return env ? env : "";
}

fs::path need_path(const std::string& p, const char* flag) {
    if (p.empty()) throw ConfigError(std::string(flag) + " is required (or set WOB_DATA_ROOT)");
    return p;
}

void add_config_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON run configuration; flags override it");
    cmd->add_option("--seed", f.seed, "Base seed");
    cmd->add_option("--scene", f.scene, "Scene JSON file");
}

int run_demo(const Flags& f, int frames, const fs::path& out) {
    const RunConfig c = resolve(f);
    if (frames < 1) throw ConfigError("--frames must be >= 1");
    const World world = load_scene(c.scene);
    EpisodeSpec spec{c.bugs.empty() ? Partition::Normal : (c.bugs.size() == 1 ? Partition::Test : Partition::Bugged), c.seed, c.bugs};
    GeneratorConfig g;
    g.frames = std::uint64_t(frames);
    g.window_length = f.window.value_or(0);
    g.duty_cycle = c.duty_cycle;
    g.attract = c.attract;
    g.agent = c.agent;
    make_dir(out);
    std::uint64_t i = 0;
    char name[64];
    const auto meta = run_episode(world, spec, g, [&](const Frame& frame, const MaskFrame& mask, Action) {
        std::snprintf(name, sizeof name, "obs_%05llu.ppm", static_cast<unsigned long long>(i));
        write_ppm(out / name, frame);
        std::snprintf(name, sizeof name, "mask_%05llu.ppm", static_cast<unsigned long long>(i));
        write_ppm(out / name, mask);
        ++i;
    });
    write_json_file(out / "meta.json", meta_to_json(meta));
    RunConfig snap = c;
    snap.window_length = g.window_length;
    write_resolved(out, "demo", snap, {{"frames", frames}});
    std::cout << "wrote " << i << " frames to " << out.string() << '\n';
    return 0;
}

int run_generate(const Flags& f, const fs::path& out) {
    const RunConfig c = resolve(f);
    const World world = load_scene(c.scene);
    const auto m = build_dataset(world, c.dataset_config(), out, [](std::size_t done, std::size_t total, const std::string& dir) {
        std::cerr << '[' << done << '/' << total << "] " << dir << '\n';
    });
    write_resolved(out, "generate", c);
    std::cout << "normal " << Manifest::frames(m.normal) << " frames, bugged " << Manifest::frames(m.bugged) << " frames, test "
              << m.test.size() << " kinds\n";
    return 0;
}

int run_train(const Flags& f, const fs::path& data, const fs::path& out) {
    const RunConfig c = resolve(f);
    const auto tc = c.train_config();
    nn::FrameSource src(nn::partition_dirs(data, Partition::Normal));
    nn::ConvStack<float> model({nn::autoencoder_table().begin(), nn::autoencoder_table().end()}, tc.model);
    model.init(tc.seed);
    write_resolved(out, "train", c, {{"data", data.string()}});
    const auto r = nn::train(model, src, tc, out, [](const nn::BatchLog& b) {
        if (b.batch % 10 == 0) std::cerr << "epoch " << b.epoch << " batch " << b.batch << " loss " << format_real(b.value.loss) << '\n';
    });
    for (std::size_t e = 0; e < r.epoch_loss.size(); ++e) std::cout << "epoch " << e + 1 << " loss " << format_real(r.epoch_loss[e]) << '\n';
    return 0;
}

int run_score(const fs::path& model_path, const std::string& episode, const std::vector<std::string>& ppms, const std::string& out, int batch) {
    if (episode.empty() == ppms.empty()) throw ConfigError("score: give exactly one of --episode or --ppm");
    if (batch < 1) throw ConfigError("--batch-size must be >= 1");
    auto loaded = nn::load_checkpoint(model_path);
    std::ofstream file;
    if (!out.empty()) {
        if (fs::path(out).has_parent_path()) make_dir(fs::path(out).parent_path());
        file.open(out, std::ios::trunc);
        if (!file) throw IoError("cannot write " + out);
    }
    std::ostream& os = out.empty() ? std::cout : file;
    if (!episode.empty()) {
        EpisodeReader r(episode);
        const auto s = nn::score_episode(loaded.model, r, batch);
        os << "frame,score\n";
        for (std::size_t i = 0; i < s.size(); ++i) os << i << ',' << format_real(s[i]) << '\n';
    } else {
        os << "file,score\n";
        for (const auto& p : ppms) {
            const RgbImage img = read_ppm(p);
            Frame fr(img.width, img.height);
            for (int y = 0; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x) fr.set(x, y, img.at(x, y));
            os << p << ',' << format_real(nn::score_frame(loaded.model, fr)) << '\n';
        }
    }
    if (!os) throw IoError("write failed: " + (out.empty() ? std::string("stdout") : out));
    return 0;
}

int run_evaluate(const Flags& f, const std::string& scorer_name, const std::string& model_path, const fs::path& data, const fs::path& out) {
    const RunConfig c = resolve(f);
    std::unique_ptr<Scorer> scorer;
    std::optional<nn::LoadedCheckpoint> loaded;
    nlohmann::json inputs = {{"data", data.string()}, {"scorer", scorer_name}};
    if (scorer_name == "model") {
        if (model_path.empty()) throw ConfigError("evaluate: --model is required with the model scorer");
        loaded.emplace(nn::load_checkpoint(model_path));
        scorer = std::make_unique<ModelScorer>(loaded->model, c.eval.batch_size);
        inputs["model"] = model_path;
    } else if (scorer_name == "oracle") {
        scorer = std::make_unique<OracleScorer>();
    } else if (scorer_name == "constant") {
        scorer = std::make_unique<ConstantScorer>();
    } else {
        throw ConfigError("--scorer must be model, oracle or constant");
    }
    const auto rep = evaluate(data, *scorer, c.eval);
    write_report(rep, c.eval, out);
    rank_report(rep, c.eval, data, out);
    write_resolved(out, "evaluate", c, inputs);

    const std::uint64_t tau = std::find(c.eval.taus.begin(), c.eval.taus.end(), 10u) != c.eval.taus.end() ? 10 : c.eval.taus.front();
    std::cout << "tau " << tau << ", normal-frame p90 " << (rep.normal_p90 ? format_real(*rep.normal_p90) : "undefined") << '\n';
    std::cout << "bug_kind,positives,precision_at_" << c.eval.ks.back() << ",mean_positive_score\n";
    for (const auto& kr : rep.kinds) {
        const auto& t = rep.at(kr.kind, tau);
        std::cout << to_string(kr.kind) << ',' << t.positives << ',' << (t.at_k.back() ? format_real(*t.at_k.back()) : "undefined") << ','
                  << (t.mean_positive ? format_real(*t.mean_positive) : "undefined") << '\n';
    }
    return 0;
}

int run_coverage(const Flags& f, int episodes, int steps, const fs::path& out) {
    const RunConfig c = resolve(f);
    if (episodes < 1 || steps < 1) throw ConfigError("--episodes and --steps must be >= 1");
    const World world = load_scene(c.scene);
    CoverageMap all(world.walkable_grid);
    for (int e = 0; e < episodes; ++e) {
        Agent a(c.agent, c.seed + std::uint64_t(e));
        a.spawn(world);
        CoverageMap m(world.walkable_grid);
        for (int i = 0; i < steps; ++i) {
            a.step(world);
            m.visit({a.state().pose.position.x, a.state().pose.position.z});
        }
        all.merge(m);
        std::cout << "episode " << e << " coverage " << format_real(m.fraction()) << '\n';
    }
    std::cout << "combined coverage " << format_real(all.fraction()) << '\n';
    const fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
    make_dir(dir);
    write_ppm(out, all.heatmap());
    write_resolved(dir, "coverage", c, {{"episodes", episodes}, {"steps", steps}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bug-injection world: render, generate data, train and evaluate a bug detector"};
    app.require_subcommand(1);
    Flags f;

    auto* demo = app.add_subcommand("demo", "Render a short episode to PPM observations and masks");
    add_config_flags(demo, f);
    int demo_frames = 10;
    std::string demo_out;
    demo->add_option("--bug", f.bug, "Bugs to enable: kind[:target][,kind[:target]...]");
    demo->add_option("--frames", demo_frames, "Frames to render")->capture_default_str();
    demo->add_option("--window", f.window, "Bug window length in frames; 0 keeps bugs on (default 0)");
    demo->add_option("--out", demo_out, "Output directory")->required();

    auto* gen = app.add_subcommand("generate", "Generate the normal, bugged and test partitions");
    add_config_flags(gen, f);
    std::string gen_out = default_data_root();
    gen->add_option("--scale", f.scale, "Fraction of the full-size frame budgets");
    gen->add_option("--out", gen_out, "Dataset root (default $WOB_DATA_ROOT)");

    auto* train = app.add_subcommand("train", "Train the autoencoder on the normal partition");
    add_config_flags(train, f);
    std::string train_data = default_data_root(), train_out;
    train->add_option("--data", train_data, "Dataset root (default $WOB_DATA_ROOT)");
    train->add_option("--out", train_out, "Directory for checkpoints and loss.csv")->required();
    train->add_option("--epochs", f.epochs, "Training epochs");
    train->add_option("--batch-size", f.batch_size, "Mini-batch size");
    train->add_option("--max-frames", f.max_frames, "Use only the first N normal frames (0 = all)");
    train->add_option("--lr", f.lr, "Adam learning rate");

    auto* score = app.add_subcommand("score", "Anomaly scores for an episode or PPM images");
    std::string score_model, score_episode, score_out;
    std::vector<std::string> score_ppms;
    int score_batch = 64;
    score->add_option("--model", score_model, "Checkpoint file")->required();
    score->add_option("--episode", score_episode, "Episode directory");
    score->add_option("--ppm", score_ppms, "84x84 PPM images");
    score->add_option("--out", score_out, "CSV output (default stdout)");
    score->add_option("--batch-size", score_batch, "Frames per forward pass")->capture_default_str();

    auto* eval = app.add_subcommand("evaluate", "Precision report on the test partition");
    add_config_flags(eval, f);
    std::string eval_model, eval_data = default_data_root(), eval_out, eval_scorer = "model";
    eval->add_option("--model", eval_model, "Checkpoint file");
    eval->add_option("--scorer", eval_scorer, "model, oracle (true tagged-pixel count) or constant")->capture_default_str();
    eval->add_option("--data", eval_data, "Dataset root (default $WOB_DATA_ROOT)");
    eval->add_option("--out", eval_out, "Report directory")->required();
    eval->add_option("--taus", f.taus, "Pixel thresholds, comma separated");
    eval->add_option("--curve-points", f.curve_points, "Score thresholds per curve");
    eval->add_option("--contact-k", f.contact_k, "Top-ranked frames in the contact sheet");

    auto* cov = app.add_subcommand("coverage", "Visit heat map of agent episodes");
    add_config_flags(cov, f);
    int cov_episodes = 10, cov_steps = 5000;
    std::string cov_out;
    cov->add_option("--episodes", cov_episodes, "Episodes to run")->capture_default_str();
    cov->add_option("--steps", cov_steps, "Steps per episode")->capture_default_str();
    cov->add_option("--out", cov_out, "Heat map PPM")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : int(ExitCode::Config);
    }

    try {
        if (*demo) return run_demo(f, demo_frames, demo_out);
        if (*gen) return run_generate(f, need_path(gen_out, "--out"));
        if (*train) return run_train(f, need_path(train_data, "--data"), train_out);
        if (*score) return run_score(score_model, score_episode, score_ppms, score_out, score_batch);
        if (*eval) return run_evaluate(f, eval_scorer, eval_model, need_path(eval_data, "--data"), eval_out);
        if (*cov) return run_coverage(f, cov_episodes, cov_steps, cov_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return int(e.code());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return int(ExitCode::Io);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
