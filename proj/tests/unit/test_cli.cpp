#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sys/wait.h>
#include <unistd.h>

#include "wob/cli/run_config.hpp"

using namespace wob;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) {
        path = fs::temp_directory_path() / ("wob_test_" + name + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string cli() {
    const char* p = std::getenv("WOB_CLI");
    if (!p) FAIL("WOB_CLI is not set; run through ctest");
    return p;
}

struct Result {
    int code = -1;
    std::string out;
};

// Runs the CLI with stdout and stderr captured to a file.
Result run(const std::string& args, const fs::path& log, const std::string& env = "") {
    const std::string cmd = env + " '" + cli() + "' " + args + " > '" + log.string() + "' 2>&1";
    const int st = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    std::ifstream in(log);
    r.out.assign(std::istreambuf_iterator<char>(in), {});
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream(p) << s;
}

// Every regular file below root, relative path -> bytes.
std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

const char* kTinyConfig = R"({
  "seed": 3,
  "dataset": {"scale": 0.0004, "episode_length": 50, "test_episode_length": 50},
  "schedule": {"window_length": 20}
})";

}  // namespace

TEST_CASE("bug lists and integer lists parse") {
    const auto b = parse_bug_list("black_screen,texture_missing:crate_1");
    REQUIRE(b.size() == 2);
    CHECK(b[0].kind == BugKind::BlackScreen);
    CHECK_FALSE(b[0].target);
    CHECK(b[1].target == "crate_1");
    CHECK_THROWS_AS(parse_bug_list("black_screen,,z_fighting"), ConfigError);
    CHECK_THROWS_AS(parse_bug_list("black_screen,black_screen"), ConfigError);
    CHECK_THROWS_AS(parse_bug_list("glitch"), ConfigError);
    CHECK(parse_u64_list("1,10,50,200", "--taus") == std::vector<std::uint64_t>{1, 10, 50, 200});
    CHECK_THROWS_AS(parse_u64_list("1,x", "--taus"), ConfigError);
    CHECK_THROWS_AS(parse_u64_list("-1", "--taus"), ConfigError);
}

TEST_CASE("run configs round-trip and reject unknown fields") {
    RunConfig c;
    c.seed = 12;
    c.train.epochs = 2;
    c.eval.taus = {5, 20};
    c.bugs = parse_bug_list("z_fighting");
    const auto j = to_json(c);
    const RunConfig back = run_config_from_json(j);
    CHECK(to_json(back) == j);
    CHECK_THROWS_AS(run_config_from_json({{"sede", 1}}), ConfigError);
    CHECK_THROWS_AS(run_config_from_json({{"train", {{"epocs", 1}}}}), ConfigError);
    CHECK_THROWS_AS(run_config_from_json({{"train", {{"epochs", "five"}}}}), ConfigError);
    RunConfig bad;
    bad.eval.taus = {0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("help lists every subcommand and flag") {
    TempDir tmp("cli_help");
    const auto top = run("--help", tmp.path / "log");
    CHECK(top.code == 0);
    for (const char* s : {"demo", "generate", "train", "score", "evaluate", "coverage"}) CHECK(top.out.find(s) != std::string::npos);
    const std::map<std::string, std::vector<std::string>> flags{
        {"demo", {"--bug", "--frames", "--window", "--out", "--config", "--seed", "--scene"}},
        {"generate", {"--scale", "--out", "--config", "--seed", "--scene"}},
        {"train", {"--data", "--out", "--epochs", "--batch-size", "--max-frames", "--lr", "--config", "--seed"}},
        {"score", {"--model", "--episode", "--ppm", "--out", "--batch-size"}},
        {"evaluate", {"--model", "--scorer", "--data", "--out", "--taus", "--curve-points", "--contact-k", "--config"}},
        {"coverage", {"--episodes", "--steps", "--out", "--config", "--seed", "--scene"}},
    };
    for (const auto& [cmd, fl] : flags) {
        const auto r = run(cmd + " --help", tmp.path / "log");
        CHECK(r.code == 0);
        for (const auto& f : fl) {
            INFO(cmd << ' ' << f);
            CHECK(r.out.find(f) != std::string::npos);
        }
    }
}

TEST_CASE("errors map to distinct exit codes") {
    TempDir tmp("cli_errors");
    const auto log = tmp.path / "log";
    CHECK(run("demo --out " + (tmp.path / "d").string() + " --no-such-flag", log).code == 2);
    CHECK(run("demo --bug glitch --out " + (tmp.path / "d").string(), log).code == 2);
    CHECK(run("", log).code == 2);
    write_text(tmp.path / "bad.json", R"({"train": {"epocs": 3}})");
    const auto r = run("generate --config " + (tmp.path / "bad.json").string() + " --out " + (tmp.path / "g").string(), log);
    CHECK(r.code == 2);
    CHECK(r.out.find("epocs") != std::string::npos);
    CHECK(run("generate --config " + (tmp.path / "missing.json").string() + " --out " + (tmp.path / "g").string(), log).code == 3);
    CHECK(run("evaluate --scorer oracle --data " + (tmp.path / "none").string() + " --out " + (tmp.path / "r").string(), log).code == 3);
    CHECK(run("generate --scale 0 --out " + (tmp.path / "g").string(), log).code == 2);
}

TEST_CASE("demo renders black screens with fully tagged masks") {
    TempDir tmp("cli_demo");
    const auto out = tmp.path / "d";
    const auto r = run("demo --bug black_screen --frames 10 --out " + out.string(), tmp.path / "log");
    INFO(r.out);
    REQUIRE(r.code == 0);
    for (int i = 0; i < 10; ++i) {
        char obs[32], mask[32];
        std::snprintf(obs, sizeof obs, "obs_%05d.ppm", i);
        std::snprintf(mask, sizeof mask, "mask_%05d.ppm", i);
        const auto o = read_ppm(out / obs);
        const auto m = read_ppm(out / mask);
        CHECK(o.width == 84);
        CHECK(std::all_of(o.pixels.begin(), o.pixels.end(), [](auto v) { return v == 0; }));
        bool all_tagged = true;
        for (int y = 0; y < 84; ++y)
            for (int x = 0; x < 84; ++x) all_tagged &= m.at(x, y) == tag_color(BugKind::BlackScreen);
        CHECK(all_tagged);
    }
    CHECK_FALSE(fs::exists(out / "obs_00010.ppm"));
    const auto snap = read_json_file(out / "resolved_config.json");
    CHECK(snap.at("command") == "demo");
    CHECK(snap.at("config").at("bugs").at(0).at("kind") == "black_screen");
}

TEST_CASE("generate, train, score and evaluate run end to end") {
    TempDir tmp("cli_pipeline");
    const auto log = tmp.path / "log";
    write_text(tmp.path / "run.json", kTinyConfig);
    const std::string cfg = " --config " + (tmp.path / "run.json").string();
    const auto a = tmp.path / "a", b = tmp.path / "b";

    REQUIRE(run("generate" + cfg + " --out " + a.string(), log).code == 0);
    // The data root can also come from the environment.
    REQUIRE(run("generate" + cfg, log, "WOB_DATA_ROOT='" + b.string() + "'").code == 0);
    CHECK(tree(a) == tree(b));
    CHECK(verify_dataset(a).test_frames.size() == 10);
    CHECK(read_json_file(a / "resolved_config.json").at("config").at("seed") == 3);

    const auto model = tmp.path / "model";
    const auto t = run("train" + cfg + " --data " + a.string() + " --out " + model.string() + " --epochs 1 --batch-size 4 --max-frames 8", log);
    INFO(t.out);
    REQUIRE(t.code == 0);
    CHECK(fs::exists(model / "model.ckpt"));
    CHECK(fs::exists(model / "epoch_1.ckpt"));
    CHECK(fs::exists(model / "resolved_config.json"));
    CHECK(slurp(model / "loss.csv").rfind("epoch,batch,loss,ssim,mse\n", 0) == 0);

    const auto ep = a / load_manifest(a).test.at(BugKind::ZFighting).front().dir;
    const auto s = run("score --model " + (model / "model.ckpt").string() + " --episode " + ep.string() + " --out " + (tmp.path / "s.csv").string(), log);
    REQUIRE(s.code == 0);
    const auto scores = slurp(tmp.path / "s.csv");
    CHECK(std::count(scores.begin(), scores.end(), '\n') == 51);

    const auto report = tmp.path / "report";
    const auto e = run("evaluate --scorer oracle --data " + a.string() + " --taus 1,10,50,200 --out " + report.string(), log);
    INFO(e.out);
    REQUIRE(e.code == 0);
    for (auto k : kAllBugKinds) CHECK(fs::exists(report / (std::string(to_string(k)) + ".csv")));
    CHECK(fs::exists(report / "summary.csv"));
    CHECK(fs::exists(report / "ranking.csv"));
    CHECK(fs::exists(report / "top_frames.ppm"));

    // A truncated observation file is a data-integrity failure.
    fs::resize_file(ep / "observations.bin", fs::file_size(ep / "observations.bin") - 7);
    CHECK(run("evaluate --scorer oracle --data " + a.string() + " --out " + (tmp.path / "r2").string(), log).code == 4);
    CHECK(run("score --model " + (model / "model.ckpt").string() + " --episode " + ep.string(), log).code == 4);
}

TEST_CASE("coverage writes a heat map") {
    TempDir tmp("cli_cov");
    const auto r = run("coverage --episodes 2 --steps 300 --out " + (tmp.path / "m" / "map.ppm").string(), tmp.path / "log");
    INFO(r.out);
    REQUIRE(r.code == 0);
    CHECK(read_ppm(tmp.path / "m" / "map.ppm").valid());
    CHECK(r.out.find("combined coverage") != std::string::npos);
    CHECK(fs::exists(tmp.path / "m" / "resolved_config.json"));
}
