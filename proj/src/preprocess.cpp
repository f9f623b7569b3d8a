#include "thyrotex/preprocess.hpp"

#include "thyrotex/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace thyrotex {

GrayImage BinaryImage::to_gray() const {
    std::vector<std::uint8_t> px(bits_.size());
    std::transform(bits_.begin(), bits_.end(), px.begin(), [](std::uint8_t b) { return b ? 255 : 0; });
    return GrayImage(width_, height_, std::move(px));
}

NormalizedPatch::NormalizedPatch(std::size_t size, std::vector<double> values)
    : size_(size), values_(std::move(values)) {
    if (size == 0 || values_.size() != size * size) throw Error("patch values do not form a square grid");
}

namespace {

std::array<std::uint64_t, 256> histogram(const GrayImage& img) {
    std::array<std::uint64_t, 256> h{};
    for (auto px : img.pixels()) ++h[px];
    return h;
}

} // namespace

std::uint8_t otsu_threshold(const GrayImage& img) {
    const auto hist = histogram(img);
    const auto occupied = std::count_if(hist.begin(), hist.end(), [](auto c) { return c > 0; });
    if (occupied < 2) throw Error("degenerate histogram: image has a single intensity");

    std::uint64_t total = 0, sum = 0;
    for (std::size_t v = 0; v < 256; ++v) {
        total += hist[v];
        sum += v * hist[v];
    }

    // Between-class variance is proportional to (N*S0 - n0*S)^2 / (n0*n1).
    // Compared as exact fractions while the products fit in 128 bits.
    const bool exact = total <= (std::uint64_t{1} << 18);
    unsigned __int128 best_num = 0, best_den = 1;
    long double best_value = -1.0L;
    int best_t = -1;

    std::uint64_t n0 = 0, s0 = 0;
    for (int t = 0; t < 256; ++t) {
        n0 += hist[t];
        s0 += static_cast<std::uint64_t>(t) * hist[t];
        const std::uint64_t n1 = total - n0;
        if (n0 == 0 || n1 == 0) continue;
        const __int128 diff = static_cast<__int128>(total) * s0 - static_cast<__int128>(n0) * sum;
        const auto mag = static_cast<unsigned __int128>(diff < 0 ? -diff : diff);
        const unsigned __int128 den = static_cast<unsigned __int128>(n0) * n1;
        if (exact) {
            const unsigned __int128 num = mag * mag;
            if (best_t < 0 || num * best_den > best_num * den) {
                best_num = num;
                best_den = den;
                best_t = t;
            }
        } else {
            const long double m = static_cast<long double>(mag);
            const long double value = m * m / static_cast<long double>(den);
            if (best_t < 0 || value > best_value) {
                best_value = value;
                best_t = t;
            }
        }
    }
    return static_cast<std::uint8_t>(best_t);
}

BinaryImage binarize(const GrayImage& img, std::uint8_t t) {
    BinaryImage out(img.width(), img.height());
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < img.width(); ++c) out.at(r, c) = img.at(r, c) > t ? 1 : 0;
    return out;
}

Rect largest_component_box(const BinaryImage& bin) {
    const std::size_t w = bin.width(), h = bin.height();
    std::vector<std::uint8_t> visited(w * h, 0);
    std::vector<std::size_t> stack;
    bool found = false;
    std::size_t best_count = 0;
    Rect best;

    for (std::size_t start = 0; start < w * h; ++start) {
        if (!bin.bits()[start] || visited[start]) continue;
        std::size_t count = 0;
        std::size_t rmin = h, rmax = 0, cmin = w, cmax = 0;
        stack.assign(1, start);
        visited[start] = 1;
        while (!stack.empty()) {
            const std::size_t idx = stack.back();
            stack.pop_back();
            const std::size_t r = idx / w, c = idx % w;
            ++count;
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
            cmin = std::min(cmin, c);
            cmax = std::max(cmax, c);
            auto visit = [&](std::size_t n) {
                if (bin.bits()[n] && !visited[n]) {
                    visited[n] = 1;
                    stack.push_back(n);
                }
            };
            if (r > 0) visit(idx - w);
            if (r + 1 < h) visit(idx + w);
            if (c > 0) visit(idx - 1);
            if (c + 1 < w) visit(idx + 1);
        }
        const Rect box{rmin, cmin, cmax - cmin + 1, rmax - rmin + 1};
        const bool better = !found || count > best_count ||
                            (count == best_count && (box.row < best.row || (box.row == best.row && box.col < best.col)));
        if (better) {
            found = true;
            best_count = count;
            best = box;
        }
    }
    if (!found) throw Error("binary image has no foreground pixels");
    return best;
}

GrayImage extract_roi(const GrayImage& img, const BinaryImage& bin) {
    if (img.width() != bin.width() || img.height() != bin.height())
        throw Error("mask dimensions do not match the image");
    const Rect box = largest_component_box(bin);
    return img.crop(box.row, box.col, box.width, box.height);
}

NormalizedPatch normalize(const GrayImage& patch) {
    if (patch.width() != patch.height())
        throw Error("normalize expects a square patch, got " + std::to_string(patch.width()) + "x" +
                    std::to_string(patch.height()));
    const auto [lo_it, hi_it] = std::minmax_element(patch.pixels().begin(), patch.pixels().end());
    const double lo = *lo_it, range = static_cast<double>(*hi_it) - lo;
    std::vector<double> values(patch.pixels().size(), 0.0);
    if (range > 0.0) {
        std::transform(patch.pixels().begin(), patch.pixels().end(), values.begin(),
                       [&](std::uint8_t v) { return (v - lo) / range; });
    }
    return NormalizedPatch(patch.width(), std::move(values));
}

namespace {

std::uint8_t quantize(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::floor(v * 255.0 + 0.5), 0.0, 255.0));
}

struct TileAxis {
    std::vector<std::size_t> start, size;
    std::vector<double> centre;
};

TileAxis tile_axis(std::size_t n, std::size_t tiles) {
    TileAxis axis;
    const std::size_t base = n / tiles;
    for (std::size_t i = 0; i < tiles; ++i) {
        const std::size_t s = i * base;
        const std::size_t len = (i + 1 == tiles) ? n - s : base;
        axis.start.push_back(s);
        axis.size.push_back(len);
        axis.centre.push_back(static_cast<double>(s) + static_cast<double>(len) / 2.0);
    }
    return axis;
}

struct Blend {
    std::size_t lo, hi;
    double weight; // on hi
};

Blend blend_at(const TileAxis& axis, std::size_t p) {
    const double x = static_cast<double>(p);
    const std::size_t last = axis.centre.size() - 1;
    if (x <= axis.centre.front()) return {0, 0, 0.0};
    if (x >= axis.centre.back()) return {last, last, 0.0};
    std::size_t i = 0;
    while (i + 1 < last && axis.centre[i + 1] <= x) ++i;
    return {i, i + 1, (x - axis.centre[i]) / (axis.centre[i + 1] - axis.centre[i])};
}

} // namespace

NormalizedPatch to_patch(const GrayImage& img) {
    if (img.width() != img.height())
        throw Error("patch must be square, got " + std::to_string(img.width()) + "x" + std::to_string(img.height()));
    std::vector<double> values(img.pixels().size());
    std::transform(img.pixels().begin(), img.pixels().end(), values.begin(),
                   [](std::uint8_t v) { return v / 255.0; });
    return NormalizedPatch(img.width(), std::move(values));
}

GrayImage to_gray(const NormalizedPatch& patch) {
    std::vector<std::uint8_t> px(patch.values().size());
    std::transform(patch.values().begin(), patch.values().end(), px.begin(), quantize);
    return GrayImage(patch.size(), patch.size(), std::move(px));
}

NormalizedPatch clahe(const NormalizedPatch& patch, std::size_t tiles_per_side, double clip_limit) {
    const std::size_t n = patch.size();
    if (tiles_per_side == 0 || tiles_per_side > n)
        throw Error("CLAHE tile count " + std::to_string(tiles_per_side) + " invalid for patch size " + std::to_string(n));
    if (!(clip_limit > 1.0)) throw Error("CLAHE clip limit must exceed 1.0");

    std::vector<std::uint8_t> q(n * n);
    std::transform(patch.values().begin(), patch.values().end(), q.begin(), quantize);

    const TileAxis axis = tile_axis(n, tiles_per_side);
    const std::size_t tiles = tiles_per_side;
    std::vector<std::array<double, 256>> mapping(tiles * tiles);

    for (std::size_t ty = 0; ty < tiles; ++ty) {
        for (std::size_t tx = 0; tx < tiles; ++tx) {
            std::array<double, 256> hist{};
            for (std::size_t r = axis.start[ty]; r < axis.start[ty] + axis.size[ty]; ++r)
                for (std::size_t c = axis.start[tx]; c < axis.start[tx] + axis.size[tx]; ++c) hist[q[r * n + c]] += 1.0;
            const double pixels = static_cast<double>(axis.size[ty] * axis.size[tx]);
            if (std::isfinite(clip_limit)) {
                const double clip = clip_limit * pixels / 256.0;
                double excess = 0.0;
                for (auto& b : hist) {
                    if (b > clip) {
                        excess += b - clip;
                        b = clip;
                    }
                }
                const double share = excess / 256.0;
                for (auto& b : hist) b += share;
            }
            auto& map = mapping[ty * tiles + tx];
            double cdf = 0.0;
            for (std::size_t b = 0; b < 256; ++b) {
                cdf += hist[b];
                map[b] = std::min(cdf / pixels, 1.0);
            }
        }
    }

    std::vector<Blend> rows(n), cols(n);
    for (std::size_t p = 0; p < n; ++p) rows[p] = cols[p] = blend_at(axis, p);

    std::vector<double> out(n * n);
    for (std::size_t r = 0; r < n; ++r) {
        const Blend& by = rows[r];
        for (std::size_t c = 0; c < n; ++c) {
            const Blend& bx = cols[c];
            const std::uint8_t v = q[r * n + c];
            const double m00 = mapping[by.lo * tiles + bx.lo][v];
            const double m01 = mapping[by.lo * tiles + bx.hi][v];
            const double m10 = mapping[by.hi * tiles + bx.lo][v];
            const double m11 = mapping[by.hi * tiles + bx.hi][v];
            const double top = (1.0 - bx.weight) * m00 + bx.weight * m01;
            const double bottom = (1.0 - bx.weight) * m10 + bx.weight * m11;
            out[r * n + c] = std::clamp((1.0 - by.weight) * top + by.weight * bottom, 0.0, 1.0);
        }
    }
    return NormalizedPatch(n, std::move(out));
}

std::size_t tiles_for(std::size_t patch_size, std::size_t tile_param, TileMode mode) {
    if (tile_param == 0) throw Error("CLAHE tile parameter must be positive");
    if (mode == TileMode::Count) return tile_param;
    return std::max<std::size_t>(1, patch_size / tile_param);
}

NormalizedPatch ts_clahe(const NormalizedPatch& patch, const ClaheSettings& settings) {
    const auto first = clahe(patch, tiles_for(patch.size(), settings.stage1, settings.mode), settings.clip_limit);
    return clahe(first, tiles_for(patch.size(), settings.stage2, settings.mode), settings.clip_limit);
}

GrayImage preprocess_image(const GrayImage& img, const PreprocessSettings& settings, PreprocessTrace* trace) {
    const std::uint8_t t = otsu_threshold(img);
    BinaryImage mask = binarize(img, t);
    const Rect box = largest_component_box(mask);
    GrayImage roi = img.crop(box.row, box.col, box.width, box.height);
    const GrayImage resized = resize_bilinear(roi, settings.patch_size, settings.patch_size);
    GrayImage enhanced = to_gray(ts_clahe(normalize(resized), settings.clahe));
    if (trace) {
        trace->threshold = t;
        trace->mask = std::move(mask);
        trace->roi = box;
        trace->roi_image = std::move(roi);
        trace->enhanced = enhanced;
    }
    return enhanced;
}

} // namespace thyrotex
