// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.
//
//   acceptance --cli path/to/wob --work dir [--only 1,5,9]

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "wob/agent/coverage.hpp"
#include "wob/cli/run_config.hpp"

using namespace wob;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string g_cli;
fs::path g_work;

const World& world() {
    static const World w = load_scene(fs::path(WOB_DATA_DIR) / "scenes" / "default.json");
    return w;
}

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

void cli(const std::string& args, const std::string& log_name) {
    const fs::path log = g_work / (log_name + ".log");
    const std::string cmd = "'" + g_cli + "' " + args + " > '" + log.string() + "' 2>&1";
    std::cerr << "  $ wob " << args << '\n';
    const int st = std::system(cmd.c_str());
    const int rc = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    if (rc != 0) throw std::runtime_error("wob " + args + " exited with " + std::to_string(rc) + " (see " + log.string() + ")");
}

std::map<std::string, std::string> tree(const fs::path& root, const std::set<std::string>& skip = {}) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file() || skip.count(e.path().filename().string())) continue;
        std::ifstream in(e.path(), std::ios::binary);
        out[fs::relative(e.path(), root).string()] = {std::istreambuf_iterator<char>(in), {}};
    }
    return out;
}

std::string tree_diff(const std::map<std::string, std::string>& a, const std::map<std::string, std::string>& b) {
    if (a.size() != b.size()) return "file sets differ (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")";
    for (const auto& [k, v] : a) {
        const auto it = b.find(k);
        if (it == b.end()) return k + " missing in second run";
        if (it->second != v) return k + " differs";
    }
    return {};
}

// 1 --------------------------------------------------------------------------

Outcome architecture() {
    nn::ConvStack<float> m;
    m.init(0);
    const auto z = m.encode(nn::Tensor<float>({3, 1, 84, 84}, 0.5f));
    const bool shape = z.shape == std::vector<int>{128, 1, 2, 2};
    const bool count = m.param_count() == 2225379;
    return {shape && count, "params " + std::to_string(m.param_count()) + ", encoder output " + std::to_string(z.dim(0)) + "x" +
                                std::to_string(z.dim(2)) + "x" + std::to_string(z.dim(3))};
}

// 2 --------------------------------------------------------------------------

double rel_err(double fd, double a) { return std::abs(fd - a) / std::max(1e-7, std::max(std::abs(fd), std::abs(a))); }

nn::Tensor<double> random_tensor(std::vector<int> shape, std::uint64_t seed, double lo, double hi) {
    nn::Tensor<double> t(std::move(shape));
    Rng r(seed);
    for (auto& v : t.data) v = r.uniform(lo, hi);
    return t;
}

// Conv or transposed conv under the linear loss sum(r * y): weights, bias and input.
double check_conv(bool transposed) {
    nn::ConvLayer<double> l(transposed, 2, 3, 3, 2);
    Rng r(transposed ? 5 : 4);
    for (auto& v : l.weight()) v = r.uniform(-1, 1);
    for (auto& v : l.bias()) v = r.uniform(-1, 1);
    auto x = random_tensor({2, 2, 7, 7}, 6, -1, 1);
    const auto y0 = l.forward(x);
    const auto rr = random_tensor(y0.shape, 7, -1, 1);
    auto loss = [&] {
        const auto y = l.forward(x);
        double s = 0;
        for (std::size_t i = 0; i < y.size(); ++i) s += rr.data[i] * y.data[i];
        return s;
    };
    l.forward(x);
    const auto dx = l.backward(rr);
    const std::vector<double> gw(l.weight_grad().begin(), l.weight_grad().end());
    const std::vector<double> gb(l.bias_grad().begin(), l.bias_grad().end());
    double worst = 0;
    const double h = 1e-3;
    auto probe = [&](double& p, double analytic) {
        const double o = p;
        p = o + h;
        const double fp = loss();
        p = o - h;
        const double fm = loss();
        p = o;
        worst = std::max(worst, rel_err((fp - fm) / (2 * h), analytic));
    };
    for (std::size_t i = 0; i < gw.size(); ++i) probe(l.weight()[i], gw[i]);
    for (std::size_t i = 0; i < gb.size(); ++i) probe(l.bias()[i], gb[i]);
    for (std::size_t i = 0; i < x.size(); ++i) probe(x.data[i], dx.data[i]);
    return worst;
}

// LeakyReLU and the output clamp away from their kinks.
double check_activations() {
    double worst = 0;
    const double h = 1e-3;
    Rng r(8);
    for (int kind = 0; kind < 2; ++kind) {
        nn::Tensor<double> x({1, 1, 1, 64});
        for (auto& v : x.data) {
            do v = r.uniform(-0.5, 1.5);
            while (std::abs(v) < 0.01 || std::abs(v - 1) < 0.01);
        }
        const auto rr = random_tensor(x.shape, 9, -1, 1);
        auto f = [&](nn::Tensor<double> t) {
            if (kind == 0) nn::leaky_relu_inplace(t, 0.01);
            else nn::clamp01_inplace(t);
            return t;
        };
        const auto y = f(x);
        auto g = rr;
        if (kind == 0) nn::leaky_relu_backward(y, g, 0.01);
        else nn::clamp01_backward(x, g);
        for (std::size_t i = 0; i < x.size(); ++i) {
            auto xp = x, xm = x;
            xp.data[i] += h;
            xm.data[i] -= h;
            const double fd = rr.data[i] * (f(xp).data[i] - f(xm).data[i]) / (2 * h);
            worst = std::max(worst, rel_err(fd, g.data[i]));
        }
    }
    return worst;
}

// 0.9 (1 - SSIM) + 0.1 MSE with respect to the reconstruction, both windows.
double check_loss() {
    double worst = 0;
    const Shape3 s{3, 16, 16};
    for (auto kind : {SsimWindow::Gaussian, SsimWindow::Uniform}) {
        SsimConfig sc;
        sc.kind = kind;
        auto x = random_tensor({1, 2 * 3 * 16 * 16}, 10, 0, 1).data;
        const auto t = random_tensor({1, 2 * 3 * 16 * 16}, 11, 0, 1).data;
        std::vector<double> g(x.size());
        combined_loss<double>(x, t, 2, s, {}, sc, g);
        const double h = 1e-4;
        for (std::size_t i = 0; i < x.size(); i += 7) {
            const double o = x[i];
            x[i] = o + h;
            const double fp = combined_loss<double>(x, t, 2, s, {}, sc).loss;
            x[i] = o - h;
            const double fm = combined_loss<double>(x, t, 2, s, {}, sc).loss;
            x[i] = o;
            worst = std::max(worst, rel_err((fp - fm) / (2 * h), g[i]));
        }
    }
    return worst;
}

// A two-conv, two-deconv stack end to end. A parameter whose perturbation moves
// a unit across a kink is retried with a smaller step; if it still crosses at
// 1e-6 it is not counted.
struct StackCheck {
    double worst = 0;
    std::size_t checked = 0, total = 0;
};

StackCheck check_stack() {
    const std::vector<nn::LayerSpec> table{
        {false, 3, 4, 3, 1, true}, {false, 4, 5, 4, 2, false}, {true, 5, 4, 4, 2, true}, {true, 4, 3, 3, 1, false}};
    nn::ConvStack<double> m(table, {}, 2);
    m.init(17);
    const auto x = random_tensor({3, 2, 12, 12}, 5, 0, 1);
    SsimConfig sc;
    sc.window = 5;
    const Shape3 s{3, 12, 12};
    auto loss = [&] {
        const auto y = nn::swap_batch_channel(m.forward(x));
        return combined_loss<double>(y.data, nn::swap_batch_channel(x).data, 2, s, {}, sc).loss;
    };
    auto kinks = [&] {
        std::vector<int> pat;
        nn::Tensor<double> h = x;
        for (std::size_t i = 0; i < m.layers().size(); ++i) {
            h = m.layers()[i].forward(h);
            if (table[i].activation) {
                for (double v : h.data) pat.push_back(v < 0);
                nn::leaky_relu_inplace(h, m.options().leaky_slope);
            }
            if (i + 1 == table.size())
                for (double v : h.data) pat.push_back(v < 0 ? -1 : (v > 1 ? 1 : 0));
        }
        return pat;
    };
    {
        const auto y = nn::swap_batch_channel(m.forward(x));
        nn::Tensor<double> g(y.shape);
        combined_loss<double>(y.data, nn::swap_batch_channel(x).data, 2, s, {}, sc, g.data);
        m.backward(nn::swap_batch_channel(g));
    }
    std::vector<std::vector<double>> analytic;
    for (auto g : m.grads()) analytic.emplace_back(g.begin(), g.end());
    StackCheck out;
    auto params = m.params();
    for (std::size_t pi = 0; pi < params.size(); ++pi)
        for (std::size_t j = 0; j < params[pi].size(); ++j) {
            ++out.total;
            const double o = params[pi][j];
            auto at = [&](double v) {
                params[pi][j] = v;
                const double f = loss();
                params[pi][j] = o;
                return f;
            };
            auto crosses = [&](double h) {
                params[pi][j] = o + h;
                const auto a = kinks();
                params[pi][j] = o - h;
                const auto b = kinks();
                params[pi][j] = o;
                return a != b;
            };
            double h = 1e-3;
            double rel = rel_err((at(o + h) - at(o - h)) / (2 * h), analytic[pi][j]);
            bool excused = false;
            while (rel >= 1e-3 && crosses(h)) {
                if (h <= 1e-6) {
                    excused = true;
                    break;
                }
                h /= 10;
                rel = rel_err((at(o + h) - at(o - h)) / (2 * h), analytic[pi][j]);
            }
            if (excused) continue;
            ++out.checked;
            out.worst = std::max(out.worst, rel);
        }
    return out;
}

Outcome gradients() {
    const double conv = check_conv(false), convt = check_conv(true), act = check_activations(), loss = check_loss();
    const auto st = check_stack();
    const double worst = std::max({conv, convt, act, loss, st.worst});
    const bool coverage = double(st.checked) >= 0.95 * double(st.total);
    return {worst < 1e-3 && coverage, "max rel err conv " + fmt(conv, 2) + ", convT " + fmt(convt, 2) + ", activations " + fmt(act, 2) +
                                          ", loss " + fmt(loss, 2) + ", stack " + fmt(st.worst, 2) + " over " + std::to_string(st.checked) +
                                          "/" + std::to_string(st.total) + " params"};
}

// 3 --------------------------------------------------------------------------

Pose facing(Vec2 from, Vec2 at, double feet_y = 0.0) { return {{from.x, feet_y, from.y}, heading_of(at.x - from.x, at.y - from.y)}; }

// Tagged pixels of kind k, and whether any pixel carries another colour.
std::pair<std::size_t, bool> golden(BugKind k) {
    BugController ctl(world(), 1);
    Pose pose = facing({3.0, 3.0}, {6.0, 3.0});
    switch (k) {
        case BugKind::ZClipping:
            ctl.enable(k, {}, "crate_4");
            pose = facing({-3.0, 7.5}, {6.0, 3.0});
            break;
        case BugKind::CameraClipping:
            ctl.enable(k);
            pose = facing({4.2, 3.0}, {6.0, 3.0});
            break;
        case BugKind::BlackScreen: ctl.enable(k); break;
        case BugKind::GeometryClipping:
            ctl.enable(k, {}, "crate_4");
            pose = facing({6.1, 3.1}, {0.0, 0.0});
            break;
        case BugKind::BoundaryHole: {
            BugParams hp;
            hp.hole_center = Vec2{0.0, 0.0};
            ctl.enable(k, hp);
            pose = facing({0.0, 0.0}, {1.0, 0.0}, -3.0);
            break;
        }
        case BugKind::ScreenTear: ctl.enable(k); break;
        default: ctl.enable(k, {}, "crate_4");
    }
    Screen screen;
    std::size_t n = 0;
    bool foreign = false;
    // A torn frame needs motion between frames, so turn while presenting.
    for (std::uint64_t f = 0; f < 20; ++f) {
        const Pose p{pose.position, wrap_angle(pose.yaw + (k == BugKind::ScreenTear ? 0.15 * double(f) : 0.0))};
        const auto [obs, mask] = screen.present(world(), agent_camera(world(), p), apply_bugs(ctl, world(), f), f, ctl.seed());
        const auto own = mask.count_color(tag_color(k));
        n += own;
        foreign |= own != mask.tagged_pixels();
    }
    return {n, foreign};
}

Outcome masks() {
    GeneratorConfig g;
    g.frames = 5000;
    std::uint64_t frames = 0, dirty = 0;
    for (std::uint64_t seed : {101u, 102u})
        run_episode(world(), {Partition::Normal, seed, {}}, g, [&](const Frame&, const MaskFrame& m, Action) {
            ++frames;
            dirty += m.tagged_pixels() > 0;
        });
    std::string detail = std::to_string(frames) + " bug-free frames, " + std::to_string(dirty) + " with tags; golden poses:";
    bool ok = dirty == 0 && frames == 10000;
    for (auto k : kAllBugKinds) {
        const auto [n, foreign] = golden(k);
        ok &= n >= 1 && !foreign;
        detail += " " + std::string(to_string(k)) + "=" + std::to_string(n) + (foreign ? "(foreign tags)" : "");
    }
    return {ok, detail};
}

// 4 --------------------------------------------------------------------------

Outcome reversibility() {
    const Camera cam = agent_camera(world(), facing({3.0, 3.0}, {6.0, 3.0}));
    const Frame clean = render_observation(world(), cam, {}, 7, 3);
    const MaskFrame clean_mask = render_mask(world(), cam, {}, 7, 3);
    int ok = 0;
    for (auto k : kAllBugKinds) {
        BugController ctl(world(), 3);
        ctl.enable(k);
        ctl.disable(k);
        const BugState s = apply_bugs(ctl, world(), 7);
        ok += render_observation(world(), cam, s, 7, 3) == clean && render_mask(world(), cam, s, 7, 3) == clean_mask;
    }
    return {ok == kBugKindCount, std::to_string(ok) + "/10 kinds restore a byte-identical frame and mask"};
}

// 5 and 9 share the desk-scale dataset --------------------------------------

fs::path desk_data() {
    static bool built = false;
    const fs::path d = g_work / "desk" / "data";
    if (!built) {
        fs::remove_all(d);
        cli("generate --scale 0.0167 --seed 1 --out '" + d.string() + "'", "desk_generate");
        built = true;
    }
    return d;
}

std::map<std::string, std::map<std::string, std::string>> read_summary(const fs::path& p, std::uint64_t tau) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::string line;
    std::getline(in, line);
    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    }
    std::map<std::string, std::map<std::string, std::string>> out;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::map<std::string, std::string> row;
        std::size_t i = 0;
        for (std::string c; std::getline(ss, c, ',') && i < cols.size(); ++i) row[cols[i]] = c;
        if (row["tau"] == std::to_string(tau)) out[row["bug_kind"]] = row;
    }
    return out;
}

double num(const std::string& s) { return s == "undefined" ? std::numeric_limits<double>::quiet_NaN() : std::stod(s); }

Outcome desk_detection() {
    const auto data = desk_data();
    const auto model = g_work / "desk" / "model";
    const auto report = g_work / "desk" / "report";
    fs::remove_all(model);
    fs::remove_all(report);
    const auto t0 = std::chrono::steady_clock::now();
    cli("train --seed 1 --data '" + data.string() + "' --out '" + model.string() + "'", "desk_train");
    const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60;
    cli("evaluate --model '" + (model / "model.ckpt").string() + "' --data '" + data.string() + "' --taus 1,10,50,200 --out '" +
            report.string() + "'",
        "desk_evaluate");
    const auto rows = read_summary(report / "summary.csv", 10);
    bool ok = true;
    std::string detail = "train " + fmt(minutes, 3) + " min;";
    for (const char* k : {"black_screen", "texture_missing"}) {
        const double p = num(rows.at(k).at("precision_at_100"));
        ok &= p >= 0.9;
        detail += std::string(" ") + k + " p@100=" + fmt(p);
    }
    const double p90 = num(rows.at("black_screen").at("normal_p90"));
    detail += "; normal p90=" + fmt(p90);
    for (const char* k : {"boundary_hole", "camera_clipping", "geometry_corruption"}) {
        const double m = num(rows.at(k).at("mean_positive_score"));
        ok &= m > p90;
        detail += std::string(" ") + k + " mean+=" + fmt(m);
    }
    const auto& gc = rows.at("geometry_clipping");
    detail += "; report only: geometry_clipping p@100=" + fmt(num(gc.at("precision_at_100"))) + " mean+=" + fmt(num(gc.at("mean_positive_score")));
    return {ok, detail};
}

// 6 --------------------------------------------------------------------------

Outcome determinism() {
    const auto root = g_work / "determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string common = " --scale 0.001 --seed 5";
    std::string detail;
    bool ok = true;
    for (const char* run : {"a", "b"}) {
        const auto d = root / run;
        cli("generate" + common + " --out '" + (d / "data").string() + "'", std::string("det_generate_") + run);
        cli("train --seed 5 --epochs 1 --data '" + (d / "data").string() + "' --out '" + (d / "model").string() + "'",
            std::string("det_train_") + run);
        cli("evaluate --model '" + (d / "model" / "model.ckpt").string() + "' --data '" + (d / "data").string() + "' --out '" +
                (d / "report").string() + "'",
            std::string("det_evaluate_") + run);
    }
    // resolved_config.json records input paths, which differ between the runs;
    // its config section is compared separately.
    for (const char* stage : {"data", "model", "report"}) {
        const auto diff = tree_diff(tree(root / "a" / stage, {"resolved_config.json"}), tree(root / "b" / stage, {"resolved_config.json"}));
        const bool same_cfg = read_json_file(root / "a" / stage / "resolved_config.json").at("config") ==
                              read_json_file(root / "b" / stage / "resolved_config.json").at("config");
        ok &= diff.empty() && same_cfg;
        detail += std::string(detail.empty() ? "" : "; ") + stage + (diff.empty() ? " identical" : ": " + diff) + (same_cfg ? "" : " (configs differ)");
    }
    return {ok, detail};
}

// 7 --------------------------------------------------------------------------

// Dijkstra over the 8-connected grid with no corner cutting, written without
// reference to the A* implementation.
double dijkstra(const NavGrid& g, Cell s, Cell t) {
    const int n = g.cols * g.rows;
    std::vector<double> d(std::size_t(n), std::numeric_limits<double>::infinity());
    std::vector<bool> done(std::size_t(n), false);
    auto free = [&](int c, int r) { return c >= 0 && r >= 0 && c < g.cols && r < g.rows && g.walkable[std::size_t(r * g.cols + c)]; };
    d[std::size_t(s.row * g.cols + s.col)] = 0;
    for (;;) {
        int u = -1;
        for (int i = 0; i < n; ++i)
            if (!done[std::size_t(i)] && std::isfinite(d[std::size_t(i)]) && (u < 0 || d[std::size_t(i)] < d[std::size_t(u)])) u = i;
        if (u < 0) break;
        done[std::size_t(u)] = true;
        const int uc = u % g.cols, ur = u / g.cols;
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                if ((!dr && !dc) || !free(uc + dc, ur + dr)) continue;
                if (dr && dc && (!free(uc + dc, ur) || !free(uc, ur + dr))) continue;
                const std::size_t v = std::size_t((ur + dr) * g.cols + uc + dc);
                d[v] = std::min(d[v], d[std::size_t(u)] + ((dr && dc) ? std::sqrt(2.0) : 1.0));
            }
    }
    return d[std::size_t(t.row * g.cols + t.col)];
}

Outcome pathfinding() {
    Rng rng(77);
    int agree = 0, reachable = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        NavGrid g(1.0, 0, 0, 10, 10);
        const double density = rng.uniform(0.1, 0.4);
        for (auto& w : g.walkable) w = rng.uniform() >= density;
        Cell s{int(rng.below(10)), int(rng.below(10))}, t{int(rng.below(10)), int(rng.below(10))};
        g.walkable[std::size_t(g.index(s))] = true;
        g.walkable[std::size_t(g.index(t))] = true;
        const double ref = dijkstra(g, s, t);
        const auto res = shortest_path(g, s, t);
        if (std::isinf(ref)) {
            agree += res.status == PathStatus::Unreachable;
            continue;
        }
        ++reachable;
        agree += res.found() && std::abs(res.cost - ref) <= 1e-9;
    }
    return {agree == 1000, std::to_string(agree) + "/1000 grids agree (" + std::to_string(reachable) + " reachable)"};
}

// 8 --------------------------------------------------------------------------

Outcome coverage() {
    CoverageMap all(world().walkable_grid);
    double first = 0;
    for (std::uint64_t e = 0; e < 10; ++e) {
        Agent a({}, e);
        a.spawn(world());
        CoverageMap m(world().walkable_grid);
        for (int i = 0; i < 5000; ++i) {
            a.step(world());
            m.visit({a.state().pose.position.x, a.state().pose.position.z});
        }
        if (e == 0) first = m.fraction();
        all.merge(m);
    }
    fs::create_directories(g_work);
    write_ppm(g_work / "coverage.ppm", all.heatmap());
    return {first >= 0.6 && all.fraction() >= 0.9, "one episode " + fmt(100 * first, 3) + "%, ten episodes " + fmt(100 * all.fraction(), 3) + "%"};
}

// 9 --------------------------------------------------------------------------

Outcome oracle_self_check() {
    const auto data = desk_data();
    OracleScorer oracle;
    const auto rep = evaluate(data, oracle, {});
    std::size_t points = 0, bad = 0;
    for (const auto& kr : rep.kinds)
        for (const auto& t : kr.taus) {
            // The lowest threshold calls every frame bugged: precision there is
            // the base rate for any scorer, so it is checked as such.
            const auto& all = t.curve.front();
            if (!all.precision || std::abs(*all.precision - double(t.positives) / double(kr.frames)) > 1e-12) ++bad;
            for (std::size_t i = 1; i < t.curve.size(); ++i) {
                const auto& p = t.curve[i];
                if (!p.precision) continue;
                ++points;
                bad += *p.precision != 1.0;
            }
        }
    return {bad == 0 && points > 0 && rep.kinds.size() == 10,
            std::to_string(points) + " defined curve points over " + std::to_string(rep.kinds.size()) + " kinds x 4 taus, " + std::to_string(bad) +
                " below 1.0"};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--cli" && i + 1 < argc) g_cli = argv[++i];
        else if (a == "--work" && i + 1 < argc) g_work = argv[++i];
        else if (a == "--only" && i + 1 < argc)
            for (auto v : parse_u64_list(argv[++i], "--only")) only.insert(int(v));
        else {
            std::cerr << "usage: acceptance --cli path/to/wob --work dir [--only 1,2,...]\n";
            return 2;
        }
    }
    if (g_cli.empty() || g_work.empty()) {
        std::cerr << "usage: acceptance --cli path/to/wob --work dir [--only 1,2,...]\n";
        return 2;
    }
    g_work = fs::absolute(g_work);
    fs::create_directories(g_work);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"architecture fidelity", architecture},
        {"gradient oracle", gradients},
        {"mask soundness and completeness", masks},
        {"bug reversibility", reversibility},
        {"desk-scale detection", desk_detection},
        {"pipeline determinism", determinism},
        {"pathfinding oracle", pathfinding},
        {"coverage", coverage},
        {"label-pipeline self-check", oracle_self_check},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int n = int(i + 1);
        if (!only.empty() && !only.count(n)) continue;
        std::cerr << "criterion " << n << ": " << criteria[i].first << " ...\n";
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << "criterion " << n << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": " << o.detail << " [" << fmt(secs, 4)
                  << " s]" << std::endl;
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
