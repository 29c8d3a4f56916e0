// Trains the autoencoder for a few steps on freshly rendered normal frames and
// compares anomaly scores of a normal and a black-screen frame.

#include <iostream>

#include "wob/dataset/generator.hpp"
#include "wob/nn/train.hpp"

using namespace wob;

int main() {
    const World world = load_scene(std::filesystem::path(WOB_DATA_DIR) / "scenes" / "default.json");
    GeneratorConfig g;
    g.frames = 64;
    const Episode normal = generate_episode(world, {Partition::Normal, 1, {}}, g);

    nn::ConvStack<float> model;
    model.init(1);
    nn::TrainConfig cfg;
    nn::Adam<float> opt(cfg.adam);
    for (int step = 0; step < 20; ++step) {
        std::vector<const std::uint8_t*> batch;
        for (int i = 0; i < 16; ++i) batch.push_back(normal.frames[std::size_t((step * 16 + i) % 64)].data.data());
        const auto v = nn::train_step(model, opt, nn::frames_to_tensor(batch), cfg);
        std::cout << "step " << step << " loss " << v.loss << " ssim " << v.ssim << " mse " << v.mse << '\n';
    }
    model.release();

    Frame black(kFrameWidth, kFrameHeight);
    std::cout << "score normal " << nn::score_frame(model, normal.frames[0]) << '\n';
    std::cout << "score black  " << nn::score_frame(model, black) << '\n';
}
