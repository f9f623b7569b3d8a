#include "oracles.hpp"
#include "synthetic.hpp"
#include "test_helpers.hpp"
#include "thyrotex/error.hpp"
#include "thyrotex/preprocess.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace thyrotex;

namespace {

NormalizedPatch levels_patch(std::size_t n, const std::vector<std::uint8_t>& levels) {
    std::vector<double> v(levels.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = levels[i] / 255.0;
    return NormalizedPatch(n, std::move(v));
}

BinaryImage mask_from(std::size_t w, std::size_t h, const std::vector<Rect>& boxes) {
    BinaryImage bin(w, h);
    for (const auto& b : boxes)
        for (std::size_t r = b.row; r < b.row + b.height; ++r)
            for (std::size_t c = b.col; c < b.col + b.width; ++c) bin.at(r, c) = 1;
    return bin;
}

} // namespace

TEST_CASE("Otsu matches an exhaustive scan on random images") {
    Rng rng(1234);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t w = 2 + rng.below(40), h = 2 + rng.below(40);
        auto img = testing::random_image(rng, w, h);
        // Mix in some narrow-range images so ties and sparse histograms appear.
        if (trial % 3 == 0)
            for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(100 + p % 4);
        const std::vector<std::uint8_t> px(img.pixels().begin(), img.pixels().end());
        const int expected = oracle::otsu_brute(px);
        if (expected < 0) continue; // single level
        CAPTURE(trial);
        CHECK(static_cast<int>(otsu_threshold(img)) == expected);
    }
}

TEST_CASE("Otsu on hand-built histograms") {
    SUBCASE("two levels: every t in [10, 199] ties, smallest wins") {
        std::vector<std::uint8_t> px(1000, 10);
        std::fill(px.begin() + 900, px.end(), 200);
        CHECK(otsu_threshold(GrayImage(100, 10, px)) == 10);
    }
    SUBCASE("bimodal clusters split between the modes") {
        Rng rng(2);
        std::vector<std::uint8_t> px(4096);
        for (std::size_t i = 0; i < px.size(); ++i)
            px[i] = static_cast<std::uint8_t>(i % 2 ? 40 + rng.below(11) : 190 + rng.below(11));
        const auto t = otsu_threshold(GrayImage(64, 64, px));
        CHECK(t >= 50);
        CHECK(t < 190);
    }
    SUBCASE("constant image is degenerate") { CHECK_THROWS_AS(otsu_threshold(GrayImage(5, 5, 9)), Error); }
}

TEST_CASE("binarize boundary") {
    const GrayImage img(4, 1, std::vector<std::uint8_t>{99, 100, 101, 255});
    const auto bin = binarize(img, 100);
    CHECK(bin.at(0, 0) == 0);
    CHECK(bin.at(0, 1) == 0);
    CHECK(bin.at(0, 2) == 1);
    CHECK(bin.at(0, 3) == 1);
    CHECK(bin.to_gray().at(0, 3) == 255);
}

TEST_CASE("largest component bounding box") {
    SUBCASE("single rectangle") {
        const Rect r{3, 5, 7, 4};
        CHECK(largest_component_box(mask_from(20, 12, {r})) == r);
    }
    SUBCASE("larger component wins") {
        const Rect small{0, 0, 3, 3}, large{5, 6, 4, 5};
        CHECK(largest_component_box(mask_from(16, 16, {small, large})) == large);
    }
    SUBCASE("diagonal touch is not connected") {
        BinaryImage bin(4, 4);
        bin.at(0, 0) = 1;
        bin.at(1, 1) = 1;
        bin.at(2, 1) = 1;
        CHECK(largest_component_box(bin) == Rect{1, 1, 1, 2});
    }
    SUBCASE("equal sizes resolve to the smallest top-left") {
        const Rect a{6, 1, 3, 3}, b{1, 8, 3, 3};
        CHECK(largest_component_box(mask_from(16, 16, {a, b})) == b);
        const Rect c{2, 9, 3, 3}, d{2, 1, 3, 3};
        CHECK(largest_component_box(mask_from(16, 16, {c, d})) == d);
    }
    SUBCASE("non-rectangular component") {
        BinaryImage bin(10, 10);
        for (std::size_t c = 1; c < 8; ++c) bin.at(2, c) = 1;
        for (std::size_t r = 2; r < 9; ++r) bin.at(r, 4) = 1;
        CHECK(largest_component_box(bin) == Rect{2, 1, 7, 7});
    }
    SUBCASE("empty mask") { CHECK_THROWS_AS(largest_component_box(BinaryImage(4, 4)), Error); }
}

TEST_CASE("extract_roi crops the bounding box") {
    Rng rng(9);
    const auto img = testing::random_image(rng, 20, 15);
    const Rect r{4, 2, 9, 6};
    const auto roi = extract_roi(img, mask_from(20, 15, {r}));
    CHECK(roi == img.crop(4, 2, 9, 6));
}

TEST_CASE("min-max normalisation") {
    SUBCASE("end points and midpoint") {
        const auto p = normalize(GrayImage(2, 2, std::vector<std::uint8_t>{0, 100, 200, 50}));
        CHECK(p.at(0, 0) == 0.0);
        CHECK(p.at(0, 1) == 0.5);
        CHECK(p.at(1, 0) == 1.0);
        CHECK(p.at(1, 1) == 0.25);
    }
    SUBCASE("constant maps to zeros") {
        const auto p = normalize(GrayImage(3, 3, 42));
        for (double v : p.values()) CHECK(v == 0.0);
    }
    SUBCASE("invariant to positive affine maps") {
        Rng rng(21);
        for (int t = 0; t < 100; ++t) {
            auto img = testing::random_image(rng, 8, 8);
            for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(p % 101);
            const int a = 1 + static_cast<int>(rng.below(2));
            const int b = static_cast<int>(rng.below(50));
            GrayImage moved = img;
            for (auto& p : moved.pixels()) p = static_cast<std::uint8_t>(a * p + b);
            const auto x = normalize(img), y = normalize(moved);
            for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(x.values()[i] - y.values()[i]) <= 1e-12);
        }
    }
    SUBCASE("non-square rejected") { CHECK_THROWS_AS(normalize(GrayImage(3, 2, 1)), Error); }
}

TEST_CASE("CLAHE") {
    Rng rng(31);
    SUBCASE("constant patch stays constant") {
        const auto out = clahe(levels_patch(16, std::vector<std::uint8_t>(256, 77)), 4, 2.0);
        for (double v : out.values()) CHECK(v == out.values()[0]);
    }
    SUBCASE("one tile, no clipping is plain histogram equalisation") {
        for (int t = 0; t < 20; ++t) {
            std::vector<std::uint8_t> levels(32 * 32);
            for (auto& l : levels) l = static_cast<std::uint8_t>(rng.below(256));
            const auto out = clahe(levels_patch(32, levels), 1, std::numeric_limits<double>::infinity());
            const auto expected = oracle::histogram_equalize(levels);
            for (std::size_t i = 0; i < levels.size(); ++i) CHECK(std::abs(out.values()[i] - expected[i]) <= 1e-12);
        }
    }
    SUBCASE("pixel at a tile centre takes that tile's mapping") {
        // 16x16 with 2 tiles per side: tiles of 8, centres at 4 and 12.
        std::vector<std::uint8_t> levels(256);
        for (auto& l : levels) l = static_cast<std::uint8_t>(rng.below(256));
        const auto out = clahe(levels_patch(16, levels), 2, 2.0);
        for (std::size_t tr = 0; tr < 2; ++tr)
            for (std::size_t tc = 0; tc < 2; ++tc) {
                std::vector<std::uint8_t> tile(64);
                for (std::size_t r = 0; r < 8; ++r)
                    for (std::size_t c = 0; c < 8; ++c) tile[r * 8 + c] = levels[(tr * 8 + r) * 16 + tc * 8 + c];
                const auto alone = clahe(levels_patch(8, tile), 1, 2.0);
                CHECK(out.at(tr * 8 + 4, tc * 8 + 4) == doctest::Approx(alone.at(4, 4)).epsilon(1e-12));
            }
        // Corner pixels sit outside all centres and use only their own tile.
        std::vector<std::uint8_t> tile(64);
        for (std::size_t r = 0; r < 8; ++r)
            for (std::size_t c = 0; c < 8; ++c) tile[r * 8 + c] = levels[r * 16 + c];
        const auto alone = clahe(levels_patch(8, tile), 1, 2.0);
        CHECK(out.at(0, 0) == doctest::Approx(alone.at(0, 0)).epsilon(1e-12));
        CHECK(out.at(3, 2) == doctest::Approx(alone.at(3, 2)).epsilon(1e-12));
    }
    SUBCASE("output within [0, 1]") {
        for (int t = 0; t < 20; ++t) {
            std::vector<std::uint8_t> levels(40 * 40);
            for (auto& l : levels) l = static_cast<std::uint8_t>(rng.below(256));
            const auto out = clahe(levels_patch(40, levels), 1 + rng.below(8), 1.5 + rng.unit() * 3);
            for (double v : out.values()) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
    }
    SUBCASE("mapping is monotone within a single tile") {
        std::vector<std::uint8_t> levels(24 * 24);
        for (auto& l : levels) l = static_cast<std::uint8_t>(rng.below(256));
        const auto out = clahe(levels_patch(24, levels), 1, 2.0);
        for (std::size_t i = 0; i < levels.size(); ++i)
            for (std::size_t j = 0; j < levels.size(); j += 7)
                if (levels[i] < levels[j]) CHECK(out.values()[i] <= out.values()[j]);
    }
    SUBCASE("two-stage composition") {
        std::vector<std::uint8_t> levels(64 * 64);
        for (auto& l : levels) l = static_cast<std::uint8_t>(rng.below(256));
        const auto p = levels_patch(64, levels);
        const auto two = ts_clahe(p, ClaheSettings{2.0, 8, 4, TileMode::Count});
        const auto manual = clahe(clahe(p, 8, 2.0), 4, 2.0);
        for (std::size_t i = 0; i < levels.size(); ++i) CHECK(two.values()[i] == manual.values()[i]);
    }
    SUBCASE("tile parameters read as pixels") {
        CHECK(tiles_for(256, 8, TileMode::Count) == 8);
        CHECK(tiles_for(256, 8, TileMode::Pixels) == 32);
        CHECK(tiles_for(256, 4, TileMode::Pixels) == 64);
    }
    SUBCASE("invalid arguments") {
        const auto p = levels_patch(8, std::vector<std::uint8_t>(64, 1));
        CHECK_THROWS_AS(clahe(p, 0, 2.0), Error);
        CHECK_THROWS_AS(clahe(p, 9, 2.0), Error);
        CHECK_THROWS_AS(clahe(p, 2, 0.5), Error);
    }
}

TEST_CASE("to_patch and to_gray round trip") {
    Rng rng(41);
    const auto img = testing::random_image(rng, 12, 12);
    CHECK(to_gray(to_patch(img)) == img);
}

TEST_CASE("preprocess_image finds the bright region and emits an N x N patch") {
    Rng rng(51);
    for (int t = 0; t < 4; ++t) {
        const auto img = t % 2 ? synthetic::checker_noise(128, rng) : synthetic::smooth_gradient(128, rng);
        PreprocessTrace trace;
        const auto out = preprocess_image(img, PreprocessSettings{64, {}}, &trace);
        CHECK(out.width() == 64);
        CHECK(out.height() == 64);
        CHECK(trace.roi == Rect{24, 24, 80, 80});
        CHECK(trace.threshold < 100);
        CHECK(trace.enhanced == out);
    }
}
