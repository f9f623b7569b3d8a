#include "thyrotex/image.hpp"

#include "thyrotex/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace thyrotex {

GrayImage::GrayImage(std::size_t width, std::size_t height, std::uint8_t fill)
    : width_(width), height_(height), pixels_(width * height, fill) {
    if (width == 0 || height == 0) throw Error("image dimensions must be at least 1x1");
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width == 0 || height == 0) throw Error("image dimensions must be at least 1x1");
    if (pixels_.size() != width * height)
        throw Error("pixel buffer size " + std::to_string(pixels_.size()) + " does not match " +
                    std::to_string(width) + "x" + std::to_string(height));
}

GrayImage GrayImage::crop(std::size_t row, std::size_t col, std::size_t w, std::size_t h) const {
    if (row + h > height_ || col + w > width_) throw Error("crop rectangle outside image");
    std::vector<std::uint8_t> out;
    out.reserve(w * h);
    for (std::size_t r = row; r < row + h; ++r) {
        const auto* begin = pixels_.data() + r * width_ + col;
        out.insert(out.end(), begin, begin + w);
    }
    return GrayImage(w, h, std::move(out));
}

namespace {

// Header token reader for the netpbm family: whitespace separated, '#' starts
// a comment running to end of line.
class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    unsigned long number(const char* field) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size()) throw Error("corrupt PGM header: missing " + std::string(field));
        if (!std::isdigit(bytes_[pos_])) throw Error("corrupt PGM header: bad " + std::string(field));
        unsigned long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000'000UL) throw Error("corrupt PGM header: " + std::string(field) + " too large");
            ++pos_;
        }
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            throw Error("corrupt PGM header: missing raster separator");
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 2;
};

} // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P') throw Error("unsupported format: not a netpbm file");
    if (bytes[1] != '5') throw Error(std::string("unsupported format: P") + static_cast<char>(bytes[1]) +
                                     " (only binary PGM P5 is supported)");
    HeaderReader header(bytes);
    const auto width = header.number("width");
    const auto height = header.number("height");
    const auto maxval = header.number("maxval");
    if (width == 0 || height == 0) throw Error("corrupt PGM header: zero dimension");
    if (maxval == 0 || maxval > 65535) throw Error("corrupt PGM header: maxval out of range");
    if (maxval > 255) throw Error("unsupported bit depth: maxval " + std::to_string(maxval) + " needs 16 bits");
    const std::size_t offset = header.raster_offset();
    const std::size_t count = width * height;
    if (bytes.size() < offset + count)
        throw Error("corrupt PGM: raster truncated (" + std::to_string(bytes.size() - std::min(offset, bytes.size())) +
                    " of " + std::to_string(count) + " bytes)");
    std::vector<std::uint8_t> pixels(bytes.begin() + offset, bytes.begin() + offset + count);
    return GrayImage(width, height, std::move(pixels));
}

GrayImage load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open image " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_pgm(bytes);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
    const std::string header =
        "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels().begin(), img.pixels().end());
    return out;
}

void save_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write image " + path.string());
    const auto bytes = encode_pgm(img);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + path.string());
}

namespace {

struct Tap {
    std::size_t lo, hi;
    double frac;
};

std::vector<Tap> taps(std::size_t in, std::size_t out) {
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    const double last = static_cast<double>(in - 1);
    std::vector<Tap> result(out);
    for (std::size_t d = 0; d < out; ++d) {
        const double src = std::clamp((static_cast<double>(d) + 0.5) * scale - 0.5, 0.0, last);
        const auto lo = static_cast<std::size_t>(std::floor(src));
        result[d] = {lo, std::min(lo + 1, in - 1), src - static_cast<double>(lo)};
    }
    return result;
}

} // namespace

GrayImage resize_bilinear(const GrayImage& img, std::size_t out_w, std::size_t out_h) {
    if (out_w == 0 || out_h == 0) throw Error("resize target must be at least 1x1");
    if (img.empty()) throw Error("cannot resize an empty image");
    const auto xs = taps(img.width(), out_w);
    const auto ys = taps(img.height(), out_h);
    GrayImage out(out_w, out_h);
    for (std::size_t r = 0; r < out_h; ++r) {
        const auto& ty = ys[r];
        for (std::size_t c = 0; c < out_w; ++c) {
            const auto& tx = xs[c];
            const double top = (1.0 - tx.frac) * img.at(ty.lo, tx.lo) + tx.frac * img.at(ty.lo, tx.hi);
            const double bottom = (1.0 - tx.frac) * img.at(ty.hi, tx.lo) + tx.frac * img.at(ty.hi, tx.hi);
            const double v = (1.0 - ty.frac) * top + ty.frac * bottom;
            out.at(r, c) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
        }
    }
    return out;
}

} // namespace thyrotex
