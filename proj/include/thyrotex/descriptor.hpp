#pragma once

#include "thyrotex/image.hpp"
#include "thyrotex/preprocess.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

namespace thyrotex {

// Square row-major real grid; the working type of the transforms.
class Grid {
public:
    Grid() = default;
    explicit Grid(std::size_t size, double fill = 0.0) : size_(size), values_(size * size, fill) {}
    Grid(std::size_t size, std::vector<double> values);

    std::size_t size() const { return size_; }
    double at(std::size_t row, std::size_t col) const { return values_[row * size_ + col]; }
    double& at(std::size_t row, std::size_t col) { return values_[row * size_ + col]; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

private:
    std::size_t size_ = 0;
    std::vector<double> values_;
};

Grid to_grid(const NormalizedPatch& patch);

// Orthonormal 2-D DCT-II, alpha(0) = 1/sqrt(N), alpha(k) = sqrt(2/N). The first
// index is the row (x) and pairs with u. Computed separably as C * I * C^T.
Grid dct2(const Grid& spatial);
Grid idct2(const Grid& freq);

// cells[i * (N/M) + j] covers rows [iM, iM+M) and cols [jM, jM+M).
std::vector<Grid> partition_cells(const Grid& patch, std::size_t cell);

using Index2 = std::pair<std::size_t, std::size_t>;

// JPEG-style zigzag over an M x M block: (0,0), (0,1), (1,0), (2,0), (1,1), ...
std::vector<Index2> zigzag_order(std::size_t m);

// First `count` coefficients along the zigzag; element 0 is DC.
std::vector<double> zigzag_select(const Grid& freq, std::size_t count);

enum class DescriptorKind { Dct, Ldct, Ilbp, BpdLdct };

std::string_view to_string(DescriptorKind kind);
DescriptorKind parse_descriptor(std::string_view text);

struct FeatureVector {
    DescriptorKind descriptor;
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
};

struct DescriptorConfig {
    DescriptorKind kind = DescriptorKind::BpdLdct;
    std::size_t cell = 8;           // M
    std::size_t coeffs = 36;        // L
    std::size_t global_coeffs = 1024;
};

// Feature length for a patch side N under `config`.
std::size_t feature_dim(const DescriptorConfig& config, std::size_t patch_size);

FeatureVector dct_global(const NormalizedPatch& patch, std::size_t global_coeffs);
FeatureVector ldct(const NormalizedPatch& patch, std::size_t cell, std::size_t coeffs);

// 8-neighbour code of a 3x3 block (row-major). Neighbour p carries weight 2^p,
// p = 0 at top-left and increasing clockwise; a neighbour sets its bit when it
// is >= the mean of all nine values.
template <class T>
std::uint8_t ilbp_code(const std::array<T, 9>& block) {
    static constexpr std::array<std::size_t, 8> clockwise{0, 1, 2, 5, 8, 7, 6, 3};
    using Acc = std::conditional_t<std::is_integral_v<T>, long long, T>;
    // 9 * i_p >= sum is the mean comparison without division.
    Acc sum{};
    for (const auto& v : block) sum += static_cast<Acc>(v);
    std::uint8_t code = 0;
    for (std::size_t p = 0; p < 8; ++p)
        if (static_cast<Acc>(block[clockwise[p]]) * Acc(9) >= sum) code |= static_cast<std::uint8_t>(1u << p);
    return code;
}

// Code image over interior pixels ((W-2) x (H-2)).
GrayImage ilbp_map(const GrayImage& img);

// Normalised 256-bin histogram of interior ILBP codes.
FeatureVector ilbp_image(const GrayImage& patch);

// Sign pattern of coefficients against their mean packed as sum B(l) * 2^l.
std::uint64_t bpd_code(std::span<const double> coeffs);

// Per-cell BPD-LDCT codes in row-major cell order, before scaling.
std::vector<std::uint64_t> bpd_ldct_codes(const NormalizedPatch& patch, std::size_t cell, std::size_t coeffs);

// Codes scaled by 1 / (2^L - 1) into [0, 1].
FeatureVector bpd_ldct(const NormalizedPatch& patch, std::size_t cell, std::size_t coeffs);

// Dispatches on config.kind. ILBP reads the 8-bit patch directly; the others
// use v / 255.
FeatureVector extract_features(const GrayImage& patch, const DescriptorConfig& config);

} // namespace thyrotex
