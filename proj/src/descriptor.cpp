#include "thyrotex/descriptor.hpp"

#include "thyrotex/error.hpp"
#include "thyrotex/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace thyrotex {

Grid::Grid(std::size_t size, std::vector<double> values) : size_(size), values_(std::move(values)) {
    if (values_.size() != size * size) throw Error("grid values do not form a square");
}

Grid to_grid(const NormalizedPatch& patch) {
    return Grid(patch.size(), std::vector<double>(patch.values().begin(), patch.values().end()));
}

namespace {

// Row u holds alpha(u) * cos((2x + 1) u pi / 2N) over x; `inverse` is its transpose.
struct DctBasis {
    std::size_t n;
    std::vector<double> forward;
    std::vector<double> inverse;

    explicit DctBasis(std::size_t size) : n(size), forward(size * size), inverse(size * size) {
        const double nn = static_cast<double>(size);
        for (std::size_t u = 0; u < size; ++u) {
            const double alpha = u == 0 ? std::sqrt(1.0 / nn) : std::sqrt(2.0 / nn);
            for (std::size_t x = 0; x < size; ++x) {
                const double v = alpha * std::cos((2.0 * x + 1.0) * u * std::numbers::pi / (2.0 * nn));
                forward[u * size + x] = v;
                inverse[x * size + u] = v;
            }
        }
    }
};

// out = B * in * B^T via two passes of rows-times-rows products:
// tmp = B * in^T (tmp[v][x] = sum_y B[v][y] in[x][y]), then out = B * tmp^T.
void separable(const std::vector<double>& basis, std::size_t n, const double* in, double* out, double* tmp) {
    const auto& kt = simd::active();
    simd::multiply_transposed(kt, basis.data(), n, in, n, n, tmp);
    simd::multiply_transposed(kt, basis.data(), n, tmp, n, n, out);
}

void require_cells(std::size_t n, std::size_t cell) {
    if (cell == 0 || n % cell != 0)
        throw Error("cell size " + std::to_string(cell) + " does not divide patch size " + std::to_string(n));
}

void require_coeffs(std::size_t count, std::size_t available) {
    if (count == 0 || count > available)
        throw Error("coefficient count " + std::to_string(count) + " outside [1, " + std::to_string(available) + "]");
}

// Copies cell (i, j) of a row-major n x n buffer into a contiguous cell x cell block.
void gather_cell(std::span<const double> src, std::size_t n, std::size_t cell, std::size_t i, std::size_t j,
                 double* dst) {
    for (std::size_t r = 0; r < cell; ++r) {
        const double* row = src.data() + (i * cell + r) * n + j * cell;
        std::copy(row, row + cell, dst + r * cell);
    }
}

// Applies `per_cell(index, zigzag coefficients)` to every cell in row-major order.
template <class Fn>
void for_each_cell_spectrum(const NormalizedPatch& patch, std::size_t cell, std::size_t coeffs, Fn&& per_cell) {
    const std::size_t n = patch.size();
    require_cells(n, cell);
    require_coeffs(coeffs, cell * cell);
    const DctBasis basis(cell);
    const auto order = zigzag_order(cell);
    const std::size_t per_side = n / cell;
    std::vector<double> block(cell * cell), freq(cell * cell), tmp(cell * cell), selected(coeffs);
    for (std::size_t i = 0; i < per_side; ++i) {
        for (std::size_t j = 0; j < per_side; ++j) {
            gather_cell(patch.values(), n, cell, i, j, block.data());
            separable(basis.forward, cell, block.data(), freq.data(), tmp.data());
            for (std::size_t l = 0; l < coeffs; ++l) selected[l] = freq[order[l].first * cell + order[l].second];
            per_cell(i * per_side + j, std::span<const double>(selected));
        }
    }
}

} // namespace

Grid dct2(const Grid& spatial) {
    const std::size_t n = spatial.size();
    if (n == 0) throw Error("dct2 needs a non-empty grid");
    const DctBasis basis(n);
    Grid out(n);
    std::vector<double> tmp(n * n);
    separable(basis.forward, n, spatial.values().data(), out.values().data(), tmp.data());
    return out;
}

Grid idct2(const Grid& freq) {
    const std::size_t n = freq.size();
    if (n == 0) throw Error("idct2 needs a non-empty grid");
    const DctBasis basis(n);
    Grid out(n);
    std::vector<double> tmp(n * n);
    separable(basis.inverse, n, freq.values().data(), out.values().data(), tmp.data());
    return out;
}

std::vector<Grid> partition_cells(const Grid& patch, std::size_t cell) {
    const std::size_t n = patch.size();
    require_cells(n, cell);
    const std::size_t per_side = n / cell;
    std::vector<Grid> cells;
    cells.reserve(per_side * per_side);
    for (std::size_t i = 0; i < per_side; ++i) {
        for (std::size_t j = 0; j < per_side; ++j) {
            Grid g(cell);
            gather_cell(patch.values(), n, cell, i, j, g.values().data());
            cells.push_back(std::move(g));
        }
    }
    return cells;
}

std::vector<Index2> zigzag_order(std::size_t m) {
    std::vector<Index2> order;
    if (m == 0) return order;
    order.reserve(m * m);
    std::size_t r = 0, c = 0;
    for (std::size_t k = 0; k < m * m; ++k) {
        order.emplace_back(r, c);
        if ((r + c) % 2 == 0) { // heading up-right
            if (c == m - 1) ++r;
            else if (r == 0) ++c;
            else { --r; ++c; }
        } else { // heading down-left
            if (r == m - 1) ++c;
            else if (c == 0) ++r;
            else { ++r; --c; }
        }
    }
    return order;
}

std::vector<double> zigzag_select(const Grid& freq, std::size_t count) {
    require_coeffs(count, freq.size() * freq.size());
    const auto order = zigzag_order(freq.size());
    std::vector<double> out(count);
    for (std::size_t l = 0; l < count; ++l) out[l] = freq.at(order[l].first, order[l].second);
    return out;
}

std::string_view to_string(DescriptorKind kind) {
    switch (kind) {
    case DescriptorKind::Dct: return "dct";
    case DescriptorKind::Ldct: return "ldct";
    case DescriptorKind::Ilbp: return "ilbp";
    case DescriptorKind::BpdLdct: return "bpd-ldct";
    }
    return "unknown";
}

DescriptorKind parse_descriptor(std::string_view text) {
    for (auto kind : {DescriptorKind::Dct, DescriptorKind::Ldct, DescriptorKind::Ilbp, DescriptorKind::BpdLdct})
        if (text == to_string(kind)) return kind;
    throw Error("unknown descriptor '" + std::string(text) + "' (expected dct, ldct, ilbp or bpd-ldct)");
}

std::size_t feature_dim(const DescriptorConfig& config, std::size_t patch_size) {
    const std::size_t cells = config.cell ? (patch_size / config.cell) * (patch_size / config.cell) : 0;
    switch (config.kind) {
    case DescriptorKind::Dct: return config.global_coeffs;
    case DescriptorKind::Ldct: return cells * config.coeffs;
    case DescriptorKind::Ilbp: return 256;
    case DescriptorKind::BpdLdct: return cells;
    }
    return 0;
}

FeatureVector dct_global(const NormalizedPatch& patch, std::size_t global_coeffs) {
    require_coeffs(global_coeffs, patch.size() * patch.size());
    return {DescriptorKind::Dct, zigzag_select(dct2(to_grid(patch)), global_coeffs)};
}

FeatureVector ldct(const NormalizedPatch& patch, std::size_t cell, std::size_t coeffs) {
    FeatureVector fv{DescriptorKind::Ldct, {}};
    const std::size_t per_side = cell ? patch.size() / cell : 0;
    fv.values.resize(per_side * per_side * coeffs);
    for_each_cell_spectrum(patch, cell, coeffs, [&](std::size_t idx, std::span<const double> sel) {
        std::copy(sel.begin(), sel.end(), fv.values.begin() + static_cast<std::ptrdiff_t>(idx * coeffs));
    });
    return fv;
}

GrayImage ilbp_map(const GrayImage& img) {
    if (img.width() < 3 || img.height() < 3) throw Error("ILBP needs at least a 3x3 image");
    GrayImage out(img.width() - 2, img.height() - 2);
    std::array<int, 9> block{};
    for (std::size_t r = 1; r + 1 < img.height(); ++r) {
        for (std::size_t c = 1; c + 1 < img.width(); ++c) {
            for (std::size_t k = 0; k < 9; ++k) block[k] = img.at(r - 1 + k / 3, c - 1 + k % 3);
            out.at(r - 1, c - 1) = ilbp_code(block);
        }
    }
    return out;
}

FeatureVector ilbp_image(const GrayImage& patch) {
    const GrayImage codes = ilbp_map(patch);
    std::array<std::size_t, 256> counts{};
    for (auto code : codes.pixels()) ++counts[code];
    const double total = static_cast<double>(codes.pixels().size());
    FeatureVector fv{DescriptorKind::Ilbp, std::vector<double>(256)};
    for (std::size_t b = 0; b < 256; ++b) fv.values[b] = static_cast<double>(counts[b]) / total;
    return fv;
}

std::uint64_t bpd_code(std::span<const double> coeffs) {
    const std::size_t count = coeffs.size();
    if (count == 0 || count > 63) throw Error("BPD-LDCT needs 1..63 coefficients, got " + std::to_string(count));
    // Measured from the first coefficient, c_l >= mean becomes
    // L * (c_l - c_0) >= sum_k (c_k - c_0), which is exact for equal values.
    const double origin = coeffs[0];
    double spread = 0.0;
    for (double c : coeffs) spread += c - origin;
    const double scale = static_cast<double>(count);
    std::uint64_t code = 0;
    for (std::size_t l = 0; l < count; ++l)
        if (scale * (coeffs[l] - origin) >= spread) code |= std::uint64_t{1} << l;
    return code;
}

std::vector<std::uint64_t> bpd_ldct_codes(const NormalizedPatch& patch, std::size_t cell, std::size_t coeffs) {
    if (coeffs > 63) throw Error("BPD-LDCT needs at most 63 coefficients, got " + std::to_string(coeffs));
    const std::size_t per_side = cell ? patch.size() / cell : 0;
    std::vector<std::uint64_t> codes(per_side * per_side);
    for_each_cell_spectrum(patch, cell, coeffs,
                           [&](std::size_t idx, std::span<const double> sel) { codes[idx] = bpd_code(sel); });
    return codes;
}

FeatureVector bpd_ldct(const NormalizedPatch& patch, std::size_t cell, std::size_t coeffs) {
    const auto codes = bpd_ldct_codes(patch, cell, coeffs);
    const double full = static_cast<double>((std::uint64_t{1} << coeffs) - 1);
    FeatureVector fv{DescriptorKind::BpdLdct, std::vector<double>(codes.size())};
    std::transform(codes.begin(), codes.end(), fv.values.begin(),
                   [full](std::uint64_t code) { return static_cast<double>(code) / full; });
    return fv;
}

FeatureVector extract_features(const GrayImage& patch, const DescriptorConfig& config) {
    switch (config.kind) {
    case DescriptorKind::Ilbp: return ilbp_image(patch);
    case DescriptorKind::Dct: return dct_global(to_patch(patch), config.global_coeffs);
    case DescriptorKind::Ldct: return ldct(to_patch(patch), config.cell, config.coeffs);
    case DescriptorKind::BpdLdct: return bpd_ldct(to_patch(patch), config.cell, config.coeffs);
    }
    throw Error("unknown descriptor");
}

} // namespace thyrotex
