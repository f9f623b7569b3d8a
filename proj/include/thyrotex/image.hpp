#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace thyrotex {

// 8-bit grayscale raster, row-major.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(std::size_t width, std::size_t height, std::uint8_t fill = 0);
    GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    bool empty() const { return pixels_.empty(); }

    std::uint8_t at(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }
    std::uint8_t& at(std::size_t row, std::size_t col) { return pixels_[row * width_ + col]; }

    std::span<const std::uint8_t> pixels() const { return pixels_; }
    std::span<std::uint8_t> pixels() { return pixels_; }

    // Sub-image [row, row + h) x [col, col + w).
    GrayImage crop(std::size_t row, std::size_t col, std::size_t w, std::size_t h) const;

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

// Reads an 8-bit binary PGM (P5). Intensities are returned as stored.
GrayImage load_image(const std::filesystem::path& path);
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);

void save_pgm(const std::filesystem::path& path, const GrayImage& img);
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);

// Bilinear resampling with half-pixel centres:
// src = (dst + 0.5) * (in / out) - 0.5, clamped to the source grid,
// rounded half-up.
GrayImage resize_bilinear(const GrayImage& img, std::size_t out_w, std::size_t out_h);

} // namespace thyrotex
