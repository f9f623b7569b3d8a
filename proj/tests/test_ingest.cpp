#include "test_helpers.hpp"
#include "thyrotex/error.hpp"
#include "thyrotex/image.hpp"
#include "thyrotex/ingest.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace thyrotex;

namespace {

Manifest parse(const std::string& text) {
    std::istringstream in(text);
    return parse_manifest(in);
}

std::string counted_manifest(std::size_t benign, const std::vector<std::pair<std::string, std::size_t>>& malignant) {
    std::string text = "path,diagnosis,tirads\n";
    for (std::size_t i = 0; i < benign; ++i) text += "b" + std::to_string(i) + ".pgm,benign," + (i % 2 ? "2" : "3") + "\n";
    std::size_t k = 0;
    for (const auto& [score, count] : malignant)
        for (std::size_t i = 0; i < count; ++i) text += "m" + std::to_string(k++) + ".pgm,malignant," + score + "\n";
    return text;
}

} // namespace

TEST_CASE("manifest parsing") {
    SUBCASE("two rows") {
        const auto m = parse("path,diagnosis,tirads\nimg1.pgm,benign,2\nimg2.pgm,malignant,4a\n");
        REQUIRE(m.entries.size() == 2);
        CHECK(m.entries[0].image_path == "img1.pgm");
        CHECK(m.entries[0].diagnosis == Diagnosis::Benign);
        CHECK(m.entries[1].tirads == Tirads::T4a);
    }
    SUBCASE("comments and blank lines") {
        const auto m = parse("# header comment\npath,diagnosis,tirads\n\n# row comment\na.pgm,malignant,unknown\n");
        REQUIRE(m.entries.size() == 1);
        CHECK(m.entries[0].tirads == Tirads::Unknown);
    }
    SUBCASE("inconsistent tirads") {
        CHECK_THROWS_WITH_AS(parse("path,diagnosis,tirads\nimg3.pgm,benign,5\n"),
                             doctest::Contains("inconsistent tirads for benign"), Error);
        CHECK_THROWS_AS(parse("path,diagnosis,tirads\nx.pgm,malignant,3\n"), Error);
    }
    SUBCASE("malformed row names its row") {
        CHECK_THROWS_WITH_AS(parse("path,diagnosis,tirads\na.pgm,benign,2\nb.pgm,benign\n"),
                             doctest::Contains("row 3"), Error);
    }
    SUBCASE("duplicate path") {
        CHECK_THROWS_WITH_AS(parse("path,diagnosis,tirads\na.pgm,benign,2\na.pgm,benign,3\n"),
                             doctest::Contains("duplicate"), Error);
    }
    SUBCASE("missing header") { CHECK_THROWS_AS(parse("a.pgm,benign,2\n"), Error); }
    SUBCASE("missing file") { CHECK_THROWS_AS(load_manifest("/nonexistent/manifest.csv"), Error); }
}

TEST_CASE("TDID-shaped manifest: 61 benign + 288 malignant") {
    // Stage II split of the malignant cases: 243 TI-RADS 4 and 45 TI-RADS 5.
    const auto m = parse(counted_manifest(61, {{"4a", 100}, {"4b", 80}, {"4c", 63}, {"5", 45}}));
    CHECK(m.entries.size() == 349);
    const auto s1 = stage_labels(m, Stage::StageI);
    CHECK(s1.samples.size() == 349);
    const auto s2 = stage_labels(m, Stage::StageII);
    std::size_t t4 = 0, t5 = 0;
    for (const auto& s : s2.samples) (s.label.class_id == 0 ? t4 : t5)++;
    CHECK(t4 == 243);
    CHECK(t5 == 45);
}

TEST_CASE("AUITD-shaped manifest: stage II gives 505 + 94") {
    const auto m = parse(counted_manifest(182, {{"4a", 200}, {"4b", 200}, {"4c", 105}, {"5", 94}}));
    CHECK(m.entries.size() == 781);
    const auto s2 = stage_labels(m, Stage::StageII);
    std::size_t t4 = 0, t5 = 0;
    for (const auto& s : s2.samples) (s.label.class_id == 0 ? t4 : t5)++;
    CHECK(t4 == 505);
    CHECK(t5 == 94);
}

TEST_CASE("stage label rules") {
    SUBCASE("benign only, stage I") {
        const auto s = stage_labels(parse(counted_manifest(3, {})), Stage::StageI);
        REQUIRE(s.samples.size() == 3);
        for (const auto& x : s.samples) CHECK(x.label.class_id == 0);
    }
    SUBCASE("stage II without malignant entries") {
        CHECK_THROWS_AS(stage_labels(parse(counted_manifest(3, {})), Stage::StageII), Error);
    }
    SUBCASE("unknown tirads excluded from stage II and counted") {
        const auto m = parse(counted_manifest(2, {{"unknown", 3}, {"5", 2}, {"4c", 1}}));
        const auto s1 = stage_labels(m, Stage::StageI);
        CHECK(s1.samples.size() == m.entries.size());
        const auto s2 = stage_labels(m, Stage::StageII);
        CHECK(s2.samples.size() == 3);
        CHECK(s2.excluded_unknown == 3);
    }
}

TEST_CASE("PGM decode") {
    SUBCASE("2x2 identity decode") {
        const std::string raw = std::string("P5\n2 2\n255\n") + std::string("\x00\xff\x80\x40", 4);
        const auto img = decode_pgm(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
        CHECK(img == GrayImage(2, 2, std::vector<std::uint8_t>{0, 255, 128, 64}));
    }
    SUBCASE("header comments") {
        const std::string raw = std::string("P5\n# made by hand\n2 1 # dims\n255\n") + std::string("\x01\x02", 2);
        const auto img = decode_pgm(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
        CHECK(img.at(0, 1) == 2);
    }
    SUBCASE("16-bit rejected") {
        const std::string raw = std::string("P5\n1 1\n65535\n") + std::string("\x00\x01", 2);
        CHECK_THROWS_WITH_AS(decode_pgm(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size())),
                             doctest::Contains("bit depth"), Error);
    }
    SUBCASE("truncated raster") {
        const std::string raw = std::string("P5\n4 4\n255\n") + std::string("\x00\x01\x02", 3);
        CHECK_THROWS_WITH_AS(decode_pgm(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size())),
                             doctest::Contains("corrupt"), Error);
    }
    SUBCASE("unsupported format") {
        const std::string raw = "P2\n1 1\n255\n7\n";
        CHECK_THROWS_WITH_AS(decode_pgm(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size())),
                             doctest::Contains("unsupported"), Error);
    }
}

TEST_CASE("PGM save/load round trip is bit exact") {
    Rng rng(11);
    const auto dir = testing::scratch_dir("pgm");
    for (int trial = 0; trial < 20; ++trial) {
        const auto img = testing::random_image(rng, 1 + rng.below(40), 1 + rng.below(40));
        save_pgm(dir / "x.pgm", img);
        CHECK(load_image(dir / "x.pgm") == img);
    }
    CHECK_THROWS_AS(load_image(dir / "missing.pgm"), Error);
}

TEST_CASE("bilinear resize") {
    SUBCASE("constant stays constant") {
        const GrayImage img(37, 23, 77);
        const auto out = resize_bilinear(img, 256, 256);
        CHECK(out.width() == 256);
        for (auto p : out.pixels()) CHECK(p == 77);
    }
    SUBCASE("identity size is bit identical") {
        Rng rng(5);
        const auto img = testing::random_image(rng, 19, 31);
        CHECK(resize_bilinear(img, 19, 31) == img);
    }
    SUBCASE("2x1 -> 4x1 by hand") {
        // scale 0.5: src = (d + 0.5) * 0.5 - 0.5 = -0.25, 0.25, 0.75, 1.25,
        // clamped to [0, 1] -> 0, 0.25, 0.75, 1 -> 0, 50, 150, 200.
        const GrayImage img(2, 1, std::vector<std::uint8_t>{0, 200});
        const auto out = resize_bilinear(img, 4, 1);
        CHECK(out == GrayImage(4, 1, std::vector<std::uint8_t>{0, 50, 150, 200}));
    }
    SUBCASE("output within input range") {
        Rng rng(6);
        for (int t = 0; t < 50; ++t) {
            auto img = testing::random_image(rng, 2 + rng.below(30), 2 + rng.below(30));
            for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(60 + p % 100);
            const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
            const auto out = resize_bilinear(img, 1 + rng.below(60), 1 + rng.below(60));
            for (auto p : out.pixels()) {
                CHECK(p >= *lo);
                CHECK(p <= *hi);
            }
        }
    }
    SUBCASE("zero target rejected") { CHECK_THROWS_AS(resize_bilinear(GrayImage(2, 2), 0, 3), Error); }
}
