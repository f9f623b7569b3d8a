#include "cli.hpp"
#include "synthetic.hpp"
#include "test_helpers.hpp"
#include "thyrotex/config.hpp"
#include "thyrotex/error.hpp"
#include "thyrotex/pipeline.hpp"
#include "thyrotex/svm.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace thyrotex;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

PipelineConfig small_config() {
    PipelineConfig cfg;
    cfg.patch_size = 64;
    return cfg;
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

} // namespace

TEST_CASE("config keys from text and validation") {
    PipelineConfig cfg;
    apply_config_text(cfg, "# comment\ndescriptor = ilbp\nsvm-gamma=0.5\nno-smote=true\n\nfolds=3\n");
    CHECK(cfg.descriptor == DescriptorKind::Ilbp);
    CHECK(*cfg.svm_gamma == 0.5);
    CHECK_FALSE(cfg.smote);
    CHECK(cfg.folds == 3);
    apply_setting(cfg, "svm-gamma", "auto");
    CHECK_FALSE(cfg.svm_gamma.has_value());
    CHECK_THROWS_AS(apply_setting(cfg, "colour", "red"), Error);
    CHECK_THROWS_AS(apply_setting(cfg, "folds", "many"), Error);
    CHECK_THROWS_AS(apply_config_text(cfg, "folds\n"), Error);

    PipelineConfig bad;
    bad.cell_size = 7;
    CHECK_THROWS_AS(validate(bad), Error);
    bad = {};
    bad.coeffs = 64;
    CHECK_THROWS_AS(validate(bad), Error);
    bad = {};
    bad.folds = 1;
    CHECK_THROWS_AS(validate(bad), Error);
    CHECK_NOTHROW(validate(PipelineConfig{}));

    const auto e = echo(PipelineConfig{});
    CHECK(e.size() == config_keys().size());
    const auto exp = experiment_config(PipelineConfig{});
    CHECK(exp.folds == 5);
    CHECK(exp.seed == 42);
    CHECK(descriptor_config(PipelineConfig{}).coeffs == 36);
}

TEST_CASE("feature and metadata files round trip") {
    const auto dir = testing::scratch_dir("features");
    FeatureTable t;
    t.dim = 3;
    t.ids = {"a.pgm", "dir/b, c.pgm"};
    t.labels = {0, 1};
    t.values = {0.1, 1.0 / 3.0, 2e-17, 5, 6, 7};
    write_features(dir / "f.csv", t);
    const auto back = read_features(dir / "f.csv");
    CHECK(back.ids == t.ids);
    CHECK(back.labels == t.labels);
    CHECK(back.values == t.values);
    const Metadata meta{{"descriptor", "bpd-ldct"}, {"dim", "3"}};
    write_metadata(dir / "f.meta", meta);
    CHECK(read_metadata(dir / "f.meta") == meta);
    CHECK(metadata_path(dir / "f.csv") == dir / "f.meta");
}

TEST_CASE("preprocess, extract, evaluate, predict") {
    const auto dir = testing::scratch_dir("pipeline");
    const auto manifest_path = synthetic::write_dataset(dir / "data", 10, 96, 3);
    const auto manifest = load_manifest(manifest_path);
    const auto cfg = small_config();

    const auto outcome = cmd_preprocess(manifest, dir / "patches", cfg, dir / "debug");
    CHECK(outcome.written == 20);
    CHECK(outcome.failures.empty());
    CHECK(fs::exists(dir / "patches" / "patch_00001.pgm"));
    CHECK(fs::exists(dir / "debug" / "patch_00001_mask.pgm"));
    CHECK(load_image(dir / "patches" / "patch_00003.pgm").width() == 64);
    const auto index = read_index(dir / "patches" / "index.csv");
    REQUIRE(index.size() == 20);
    CHECK(index[0].sample_id == manifest.entries[0].image_path);

    SUBCASE("rerun is byte identical") {
        cmd_preprocess(manifest, dir / "again", cfg);
        CHECK(slurp(dir / "patches" / "index.csv") == slurp(dir / "again" / "index.csv"));
        for (int i = 1; i <= 20; ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "patch_%05d.pgm", i);
            CHECK(slurp(dir / "patches" / name) == slurp(dir / "again" / name));
        }
    }

    const auto table = cmd_extract(dir / "patches" / "index.csv", dir / "bpd.csv", cfg);
    CHECK(table.dim == 64);
    CHECK(table.size() == 20);
    CHECK(read_metadata(dir / "bpd.meta").size() > 5);

    SUBCASE("ILBP features have 256 columns") {
        auto ilbp = cfg;
        ilbp.descriptor = DescriptorKind::Ilbp;
        CHECK(cmd_extract(dir / "patches" / "index.csv", dir / "ilbp.csv", ilbp).dim == 256);
    }
    SUBCASE("patch size mismatch") {
        auto other = cfg;
        other.patch_size = 128;
        CHECK_THROWS_AS(cmd_extract(dir / "patches" / "index.csv", dir / "x.csv", other), Error);
    }

    const auto out = cmd_evaluate(dir / "bpd.csv", manifest, Stage::StageI, cfg, dir / "eval", dir / "model.txt");
    CHECK(out.report.per_fold.size() == 5);
    CHECK(out.model.has_value());
    const auto report = slurp(dir / "eval" / "report.csv");
    CHECK(std::count(report.begin(), report.end(), '\n') == 7);
    CHECK(fs::exists(dir / "eval" / "summary.txt"));

    SUBCASE("evaluate is deterministic") {
        cmd_evaluate(dir / "bpd.csv", manifest, Stage::StageI, cfg, dir / "eval2");
        CHECK(slurp(dir / "eval" / "report.csv") == slurp(dir / "eval2" / "report.csv"));
        CHECK(slurp(dir / "eval" / "summary.txt") == slurp(dir / "eval2" / "summary.txt"));
    }
    SUBCASE("SMOTE switch is echoed") {
        auto off = cfg;
        off.smote = false;
        cmd_evaluate(dir / "bpd.csv", manifest, Stage::StageI, off, dir / "eval3");
        CHECK(slurp(dir / "eval3" / "report.meta").find("config.no-smote=true") != std::string::npos);
    }
    SUBCASE("stage II uses TI-RADS labels") {
        auto three = cfg;
        three.folds = 3; // 6 TI-RADS 4 vs 4 TI-RADS 5
        three.smote_k = 1;
        const auto s2 = cmd_evaluate(dir / "bpd.csv", manifest, Stage::StageII, three, dir / "eval4");
        std::size_t n = 0;
        for (const auto& f : s2.report.per_fold) n += f.test_indices.size();
        CHECK(n == 10);
    }

    SUBCASE("predictions reproduce the training-time output") {
        cmd_predict(dir / "model.txt", dir / "bpd.csv", dir / "pred.csv");
        CHECK(slurp(dir / "pred.csv") == slurp(dir / "eval" / "train_predictions.csv"));
    }
    SUBCASE("predict on an empty feature file writes only a header") {
        spit(dir / "empty.csv", "sample_id,label,f0\n");
        cmd_predict(dir / "model.txt", dir / "empty.csv", dir / "empty_pred.csv");
        CHECK(slurp(dir / "empty_pred.csv") == "sample_id,label,score\n");
    }
    SUBCASE("predict rejects a dimension mismatch") {
        spit(dir / "narrow.csv", "sample_id,label,f0\nx,0,0.5\n");
        CHECK_THROWS_WITH_AS(cmd_predict(dir / "model.txt", dir / "narrow.csv", dir / "p.csv"),
                             doctest::Contains("dimension"), Error);
    }
    SUBCASE("report gathers average rows") {
        const auto text = cmd_report({"bpd=" + (dir / "eval").string()}, dir / "table.csv");
        CHECK(text.find("bpd") != std::string::npos);
        CHECK(slurp(dir / "table.csv").rfind("name,pre,f1,spec,sen,acc,avg\nbpd,", 0) == 0);
    }
}

TEST_CASE("join reports orphaned ids") {
    std::istringstream in("path,diagnosis,tirads\na.pgm,benign,2\nb.pgm,malignant,5\n");
    const auto manifest = parse_manifest(in);
    FeatureTable t;
    t.dim = 1;
    t.ids = {"a.pgm", "z.pgm"};
    t.labels = {0, 1};
    t.values = {0.0, 1.0};
    try {
        join_labels(t, manifest, Stage::StageI);
        FAIL("expected a join error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("z.pgm (features only)") != std::string::npos);
        CHECK(msg.find("b.pgm (manifest only)") != std::string::npos);
    }
    CHECK_THROWS_AS(join_labels(t, std::nullopt, Stage::StageII), Error);
    CHECK(join_labels(t, std::nullopt, Stage::StageI).size() == 2);
}

TEST_CASE("unreadable images are reported and skipped") {
    const auto dir = testing::scratch_dir("unreadable");
    synthetic::write_dataset(dir, 3, 64, 5);
    spit(dir / "images" / "broken.pgm", "P5\n64 64\n255\nshort");
    {
        std::ofstream m(dir / "manifest.csv", std::ios::app);
        m << "images/broken.pgm,benign,2\n";
    }
    const auto outcome = cmd_preprocess(load_manifest(dir / "manifest.csv"), dir / "out", small_config());
    CHECK(outcome.written == 6);
    REQUIRE(outcome.failures.size() == 1);
    CHECK(outcome.failures[0].sample_id == "images/broken.pgm");

    std::string err;
    const int code = run_cli({"--patch-size", "64", "preprocess", "--manifest", (dir / "manifest.csv").string(), "--out",
                              (dir / "cli_out").string()},
                             nullptr, &err);
    CHECK(code == 1);
    CHECK(err.find("broken.pgm") != std::string::npos);
    CHECK(read_index(dir / "cli_out" / "index.csv").size() == 6);
}

TEST_CASE("extract on an empty index fails") {
    const auto dir = testing::scratch_dir("empty_index");
    spit(dir / "index.csv", "sample_id,patch,diagnosis,tirads\n");
    CHECK_THROWS_WITH_AS(cmd_extract(dir / "index.csv", dir / "f.csv", PipelineConfig{}), doctest::Contains("no samples"),
                         Error);
}

TEST_CASE("command line") {
    std::string out, err;
    CHECK(run_cli({"--help"}, &out) == 0);
    for (const auto& key : config_keys()) CHECK(out.find("--" + key.name) != std::string::npos);
    for (const char* sub : {"preprocess", "extract", "evaluate", "predict", "report"})
        CHECK(out.find(sub) != std::string::npos);
    CHECK(run_cli({"--version"}, &out) == 0);
    CHECK(out.find(kVersion) != std::string::npos);
    CHECK(run_cli({"--bogus-flag", "extract"}, nullptr, &err) != 0);
    CHECK(run_cli({"--cell-size", "7", "extract", "--index", "x", "--out", "y"}, nullptr, &err) == 1);
    CHECK(run_cli({"extract", "--index", "/nonexistent/index.csv", "--out", "/tmp/x.csv"}, nullptr, &err) == 1);
    CHECK(!err.empty());

    SUBCASE("full chain through the CLI") {
        const auto dir = testing::scratch_dir("cli_chain");
        const auto manifest = synthetic::write_dataset(dir / "data", 6, 64, 9);
        spit(dir / "run.cfg", "patch-size=64\nfolds=3\n");
        const std::string cfg = (dir / "run.cfg").string();
        CHECK(run_cli({"--config", cfg, "preprocess", "--manifest", manifest.string(), "--out", (dir / "p").string()}) == 0);
        CHECK(run_cli({"--config", cfg, "extract", "--index", (dir / "p" / "index.csv").string(), "--out",
                       (dir / "f.csv").string()}) == 0);
        CHECK(run_cli({"--config", cfg, "--no-smote", "evaluate", "--features", (dir / "f.csv").string(), "--manifest",
                       manifest.string(), "--out", (dir / "e").string(), "--model-out", (dir / "m.txt").string()}) == 0);
        const auto report = slurp(dir / "e" / "report.csv");
        CHECK(std::count(report.begin(), report.end(), '\n') == 5);
        CHECK(slurp(dir / "e" / "report.meta").find("config.no-smote=true") != std::string::npos);
        CHECK(run_cli({"predict", "--model", (dir / "m.txt").string(), "--features", (dir / "f.csv").string(), "--out",
                       (dir / "pred.csv").string()}) == 0);
        CHECK(run_cli({"report", (dir / "e").string(), "--out", (dir / "t.csv").string()}, &out) == 0);
    }
}
