#pragma once

#include "thyrotex/image.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace thyrotex {

// Foreground mask with the dimensions of its source image; 1 = foreground.
class BinaryImage {
public:
    BinaryImage(std::size_t width, std::size_t height) : width_(width), height_(height), bits_(width * height, 0) {}

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::uint8_t at(std::size_t row, std::size_t col) const { return bits_[row * width_ + col]; }
    std::uint8_t& at(std::size_t row, std::size_t col) { return bits_[row * width_ + col]; }
    std::span<const std::uint8_t> bits() const { return bits_; }

    // 0/255 rendering for debug dumps.
    GrayImage to_gray() const;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<std::uint8_t> bits_;
};

// Square grid of reals in [0, 1], row-major.
class NormalizedPatch {
public:
    NormalizedPatch() = default;
    NormalizedPatch(std::size_t size, std::vector<double> values);

    std::size_t size() const { return size_; }
    double at(std::size_t row, std::size_t col) const { return values_[row * size_ + col]; }
    std::span<const double> values() const { return values_; }

private:
    std::size_t size_ = 0;
    std::vector<double> values_;
};

// Otsu threshold over the 256-bin histogram: class 0 is {pixel <= t}.
// Maximises between-class variance, ties going to the smaller t.
std::uint8_t otsu_threshold(const GrayImage& img);

// bit = 1 iff pixel > t.
BinaryImage binarize(const GrayImage& img, std::uint8_t t);

struct Rect {
    std::size_t row = 0, col = 0, width = 0, height = 0;
    friend bool operator==(const Rect&, const Rect&) = default;
};

// Bounding box of the largest 4-connected foreground component. Equal-size
// components resolve to the lexicographically smallest (row, col) top-left.
Rect largest_component_box(const BinaryImage& bin);

GrayImage extract_roi(const GrayImage& img, const BinaryImage& bin);

// (I - min) / (max - min); a constant image maps to all zeros.
NormalizedPatch normalize(const GrayImage& patch);

// Square input required. Values are requantised to 0..255 internally.
NormalizedPatch to_patch(const GrayImage& img);
GrayImage to_gray(const NormalizedPatch& patch);

// How tile parameters are read: as a tile count per side, or as a tile side
// length in pixels.
enum class TileMode { Count, Pixels };

// Contrast-limited adaptive histogram equalisation.
//
// The patch is split into tiles_per_side^2 tiles (trailing tiles absorb any
// remainder). Each tile's 256-bin histogram is clipped at
// clip_limit * pixels / 256, the excess spread uniformly over all bins, and its
// CDF becomes the tile mapping. A pixel's output is the bilinear blend of the
// mappings of the four tiles whose centres surround it; tile centres sit at
// start + size / 2 in pixel coordinates, and pixels outside the outermost
// centres use the nearest tile only. clip_limit may be +infinity.
NormalizedPatch clahe(const NormalizedPatch& patch, std::size_t tiles_per_side, double clip_limit);

struct ClaheSettings {
    double clip_limit = 2.0;
    std::size_t stage1 = 8;
    std::size_t stage2 = 4;
    TileMode mode = TileMode::Count;
};

// Tile count per side for a patch given a tile parameter and its reading.
std::size_t tiles_for(std::size_t patch_size, std::size_t tile_param, TileMode mode);

// Two CLAHE passes: stage1 tiles, then stage2 tiles.
NormalizedPatch ts_clahe(const NormalizedPatch& patch, const ClaheSettings& settings = {});

struct PreprocessSettings {
    std::size_t patch_size = 256;
    ClaheSettings clahe;
};

// Intermediate products kept for debug dumps.
struct PreprocessTrace {
    std::uint8_t threshold = 0;
    BinaryImage mask{1, 1};
    Rect roi;
    GrayImage roi_image;
    GrayImage enhanced;
};

// ROI detection, resize to patch_size, normalisation and TS-CLAHE; returns the
// enhanced patch quantised to 8 bits.
GrayImage preprocess_image(const GrayImage& img, const PreprocessSettings& settings,
                           PreprocessTrace* trace = nullptr);

} // namespace thyrotex
