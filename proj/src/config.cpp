#include "thyrotex/config.hpp"

#include "thyrotex/csv.hpp"
#include "thyrotex/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace thyrotex {

namespace {

std::size_t parse_count(std::string_view value, std::string_view key) {
    const auto v = csv::parse_int(value, key);
    if (v < 0) throw Error(std::string(key) + " must be non-negative");
    return static_cast<std::size_t>(v);
}

bool parse_bool(std::string_view value, std::string_view key) {
    const auto t = csv::trim(value);
    if (t.empty() || t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw Error("invalid boolean for " + std::string(key) + ": '" + std::string(value) + "'");
}

std::string show_bool(bool b) { return b ? "true" : "false"; }

template <class Field>
ConfigKey count_key(std::string name, std::string help, Field field) {
    return {name, std::move(help), false,
            [field, name](PipelineConfig& c, std::string_view v) { c.*field = parse_count(v, name); },
            [field](const PipelineConfig& c) { return std::to_string(c.*field); }};
}

template <class Field>
ConfigKey real_key(std::string name, std::string help, Field field) {
    return {name, std::move(help), false,
            [field, name](PipelineConfig& c, std::string_view v) { c.*field = csv::parse_real(v, name); },
            [field](const PipelineConfig& c) { return csv::format_real(c.*field); }};
}

// `invert` stores the negation, for --no-* switches.
template <class Field>
ConfigKey switch_key(std::string name, std::string help, Field field, bool invert) {
    return {name, std::move(help), true,
            [field, name, invert](PipelineConfig& c, std::string_view v) { c.*field = parse_bool(v, name) != invert; },
            [field, invert](const PipelineConfig& c) { return show_bool(c.*field != invert); }};
}

std::vector<ConfigKey> build_keys() {
    std::vector<ConfigKey> keys;
    keys.push_back(count_key("patch-size", "Canonical patch side N in pixels", &PipelineConfig::patch_size));
    keys.push_back({"descriptor", "Texture descriptor: dct, ldct, ilbp or bpd-ldct", false,
                    [](PipelineConfig& c, std::string_view v) { c.descriptor = parse_descriptor(csv::trim(v)); },
                    [](const PipelineConfig& c) { return std::string(to_string(c.descriptor)); }});
    keys.push_back(count_key("cell-size", "LDCT cell side M", &PipelineConfig::cell_size));
    keys.push_back(count_key("coeffs", "Zigzag coefficients kept per cell (L)", &PipelineConfig::coeffs));
    keys.push_back(count_key("global-coeffs", "Zigzag coefficients kept by the global DCT", &PipelineConfig::global_coeffs));
    keys.push_back(real_key("clahe-clip", "CLAHE clip limit relative to a uniform histogram", &PipelineConfig::clahe_clip));
    keys.push_back(count_key("clahe-stage1-tiles", "First CLAHE pass tiles per side", &PipelineConfig::clahe_stage1_tiles));
    keys.push_back(count_key("clahe-stage2-tiles", "Second CLAHE pass tiles per side", &PipelineConfig::clahe_stage2_tiles));
    keys.push_back(switch_key("tiles-are-pixels", "Read CLAHE tile parameters as tile side lengths in pixels",
                              &PipelineConfig::tiles_are_pixels, false));
    keys.push_back(switch_key("no-smote", "Disable SMOTE balancing of training folds", &PipelineConfig::smote, true));
    keys.push_back(count_key("smote-k", "SMOTE nearest-neighbour count", &PipelineConfig::smote_k));
    keys.push_back(real_key("svm-c", "SVM box constraint C", &PipelineConfig::svm_c));
    keys.push_back({"svm-gamma", "RBF width, or 'auto' for 1/(dim * mean feature variance)", false,
                    [](PipelineConfig& c, std::string_view v) {
                        if (csv::trim(v) == "auto") c.svm_gamma.reset();
                        else c.svm_gamma = csv::parse_real(v, "svm-gamma");
                    },
                    [](const PipelineConfig& c) { return c.svm_gamma ? csv::format_real(*c.svm_gamma) : "auto"; }});
    keys.push_back(switch_key("grid-search", "Select C and gamma by inner cross-validation", &PipelineConfig::grid_search, false));
    keys.push_back(count_key("inner-folds", "Inner folds used by the grid search", &PipelineConfig::inner_folds));
    keys.push_back(real_key("tol", "SMO KKT tolerance", &PipelineConfig::tol));
    keys.push_back(count_key("folds", "Cross-validation folds K", &PipelineConfig::folds));
    keys.push_back(switch_key("no-stratify", "Plain random folds instead of stratified ones", &PipelineConfig::stratify, true));
    keys.push_back({"seed", "Base random seed", false,
                    [](PipelineConfig& c, std::string_view v) {
                        const auto s = csv::parse_int(v, "seed");
                        if (s < 0) throw Error("seed must be non-negative");
                        c.seed = static_cast<std::uint64_t>(s);
                    },
                    [](const PipelineConfig& c) { return std::to_string(c.seed); }});
    keys.push_back(count_key("jobs", "Worker threads", &PipelineConfig::jobs));
    keys.push_back(switch_key("verbose", "Progress output on stderr", &PipelineConfig::verbose, false));
    return keys;
}

} // namespace

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = build_keys();
    return keys;
}

void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value) {
    for (const auto& k : config_keys()) {
        if (k.name == key) {
            k.apply(cfg, value);
            return;
        }
    }
    throw Error("unknown configuration key '" + std::string(key) + "'");
}

void apply_config_text(PipelineConfig& cfg, std::string_view text, const std::string& source) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (csv::is_ignorable(line)) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error(source + " line " + std::to_string(row) + ": expected key=value");
        const auto key = csv::trim(std::string_view(line).substr(0, eq));
        const auto value = csv::trim(std::string_view(line).substr(eq + 1));
        try {
            apply_setting(cfg, key, value);
        } catch (const Error& e) {
            throw Error(source + " line " + std::to_string(row) + ": " + e.what());
        }
    }
}

void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    apply_config_text(cfg, buf.str(), path.string());
}

void validate(const PipelineConfig& cfg) {
    auto fail = [](const std::string& msg) { throw Error("invalid configuration: " + msg); };
    if (cfg.patch_size < 3) fail("patch-size must be at least 3");
    if (cfg.cell_size == 0 || cfg.patch_size % cfg.cell_size != 0)
        fail("cell-size " + std::to_string(cfg.cell_size) + " must divide patch-size " + std::to_string(cfg.patch_size));
    if (cfg.coeffs == 0 || cfg.coeffs > cfg.cell_size * cfg.cell_size)
        fail("coeffs must lie in [1, cell-size^2]");
    if (cfg.descriptor == DescriptorKind::BpdLdct && cfg.coeffs > 63) fail("bpd-ldct supports at most 63 coeffs");
    if (cfg.global_coeffs == 0 || cfg.global_coeffs > cfg.patch_size * cfg.patch_size)
        fail("global-coeffs must lie in [1, patch-size^2]");
    if (!(cfg.clahe_clip > 1.0)) fail("clahe-clip must exceed 1");
    if (cfg.clahe_stage1_tiles == 0 || cfg.clahe_stage2_tiles == 0) fail("CLAHE tile parameters must be positive");
    if (!cfg.tiles_are_pixels && (cfg.clahe_stage1_tiles > cfg.patch_size || cfg.clahe_stage2_tiles > cfg.patch_size))
        fail("CLAHE tile counts cannot exceed patch-size");
    if (cfg.smote_k == 0) fail("smote-k must be at least 1");
    if (!(cfg.svm_c > 0.0)) fail("svm-c must be positive");
    if (cfg.svm_gamma && !(*cfg.svm_gamma > 0.0)) fail("svm-gamma must be positive");
    if (!(cfg.tol > 0.0)) fail("tol must be positive");
    if (cfg.folds < 2) fail("folds must be at least 2");
    if (cfg.inner_folds < 2) fail("inner-folds must be at least 2");
}

std::vector<std::pair<std::string, std::string>> echo(const PipelineConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : config_keys()) out.emplace_back(k.name, k.show(cfg));
    return out;
}

PreprocessSettings preprocess_settings(const PipelineConfig& cfg) {
    PreprocessSettings s;
    s.patch_size = cfg.patch_size;
    s.clahe.clip_limit = cfg.clahe_clip;
    s.clahe.stage1 = cfg.clahe_stage1_tiles;
    s.clahe.stage2 = cfg.clahe_stage2_tiles;
    s.clahe.mode = cfg.tiles_are_pixels ? TileMode::Pixels : TileMode::Count;
    return s;
}

DescriptorConfig descriptor_config(const PipelineConfig& cfg) {
    return {cfg.descriptor, cfg.cell_size, cfg.coeffs, cfg.global_coeffs};
}

ExperimentConfig experiment_config(const PipelineConfig& cfg) {
    ExperimentConfig e;
    e.folds = cfg.folds;
    e.stratify = cfg.stratify;
    e.seed = cfg.seed;
    e.smote = cfg.smote;
    e.smote_k = cfg.smote_k;
    e.svm.C = cfg.svm_c;
    e.svm.gamma = cfg.svm_gamma;
    e.svm.tol = cfg.tol;
    e.grid_search = cfg.grid_search;
    e.inner_folds = cfg.inner_folds;
    e.jobs = cfg.jobs;
    return e;
}

} // namespace thyrotex
