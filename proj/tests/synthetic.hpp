#pragma once

// Synthetic two-texture dataset: bright textured regions on a dark frame.
// Class 0 (benign) carries a smooth low-frequency gradient, class 1
// (malignant) a checkerboard with additive noise.

#include "thyrotex/image.hpp"
#include "thyrotex/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

namespace synthetic {

inline thyrotex::GrayImage smooth_gradient(std::size_t size, thyrotex::Rng& rng) {
    const std::size_t frame = size * 3 / 16;
    const double angle = rng.unit() * 2.0 * 3.14159265358979;
    const double lo = 120.0 + 30.0 * rng.unit();
    const double span = 80.0 + 40.0 * rng.unit();
    thyrotex::GrayImage img(size, size, 0);
    for (std::size_t r = frame; r < size - frame; ++r)
        for (std::size_t c = frame; c < size - frame; ++c) {
            const double x = static_cast<double>(c - frame) / static_cast<double>(size - 2 * frame);
            const double y = static_cast<double>(r - frame) / static_cast<double>(size - 2 * frame);
            const double t = 0.5 + 0.5 * std::sin(3.0 * (x * std::cos(angle) + y * std::sin(angle)));
            img.at(r, c) = static_cast<std::uint8_t>(std::lround(std::min(250.0, lo + span * t)));
        }
    for (std::size_t r = 0; r < size; ++r)
        for (std::size_t c = 0; c < size; ++c)
            if (r < frame || c < frame || r >= size - frame || c >= size - frame)
                img.at(r, c) = static_cast<std::uint8_t>(rng.below(12));
    return img;
}

inline thyrotex::GrayImage checker_noise(std::size_t size, thyrotex::Rng& rng) {
    const std::size_t frame = size * 3 / 16;
    const std::size_t period = 2 + rng.below(3);
    const int dark = 140 + static_cast<int>(rng.below(20));
    const int bright = 215 + static_cast<int>(rng.below(20));
    thyrotex::GrayImage img(size, size, 0);
    for (std::size_t r = 0; r < size; ++r)
        for (std::size_t c = 0; c < size; ++c) {
            if (r < frame || c < frame || r >= size - frame || c >= size - frame) {
                img.at(r, c) = static_cast<std::uint8_t>(rng.below(12));
                continue;
            }
            const bool on = ((r / period) + (c / period)) % 2 == 0;
            const int noise = static_cast<int>(rng.below(31)) - 15;
            img.at(r, c) = static_cast<std::uint8_t>(std::clamp((on ? bright : dark) + noise, 100, 255));
        }
    return img;
}

// Writes `per_class` images of each class plus manifest.csv into dir and
// returns the manifest path.
inline std::filesystem::path write_dataset(const std::filesystem::path& dir, std::size_t per_class,
                                           std::size_t size = 256, std::uint64_t seed = 7) {
    std::filesystem::create_directories(dir / "images");
    thyrotex::Rng rng(seed);
    std::ofstream manifest(dir / "manifest.csv");
    manifest << "# synthetic two-texture set\npath,diagnosis,tirads\n";
    for (std::size_t i = 0; i < per_class; ++i) {
        const std::string smooth = "images/smooth_" + std::to_string(i) + ".pgm";
        const std::string checker = "images/checker_" + std::to_string(i) + ".pgm";
        thyrotex::save_pgm(dir / smooth, smooth_gradient(size, rng));
        thyrotex::save_pgm(dir / checker, checker_noise(size, rng));
        manifest << smooth << ",benign," << (i % 2 ? "2" : "3") << "\n";
        manifest << checker << ",malignant," << (i % 3 == 0 ? "5" : "4b") << "\n";
    }
    return dir / "manifest.csv";
}

} // namespace synthetic
