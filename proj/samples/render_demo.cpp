// Renders one frame of the default scene per bug kind, with its mask, into a
// directory given on the command line (default ./render_demo).

#include <iostream>

#include "wob/dataset/generator.hpp"

using namespace wob;

int main(int argc, char** argv) {
    const std::filesystem::path out = argc > 1 ? argv[1] : "render_demo";
    std::filesystem::create_directories(out);
    const World world = load_scene(std::filesystem::path(WOB_DATA_DIR) / "scenes" / "default.json");

    GeneratorConfig g;
    g.frames = 300;  // body-driven bugs need the agent to walk into them
    g.window_length = 0;  // bug on from the first frame
    for (auto k : kAllBugKinds) {
        const std::string name(to_string(k));
        Frame last;
        MaskFrame last_mask;
        std::size_t best = 0;
        // Keep the frame where the bug shows most.
        run_episode(world, {Partition::Test, 7, {{k, {}, {}}}}, g, [&](const Frame& f, const MaskFrame& m, Action) {
            const auto n = m.tagged_pixels();
            if (last.data.empty() || n > best) {
                best = n;
                last = f;
                last_mask = m;
            }
        });
        write_ppm(out / (name + ".ppm"), last);
        write_ppm(out / (name + "_mask.ppm"), last_mask);
        std::cout << name << ": " << best << " tagged pixels\n";
    }
}
