#pragma once

#include "thyrotex/descriptor.hpp"
#include "thyrotex/eval.hpp"
#include "thyrotex/preprocess.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace thyrotex {

inline constexpr std::string_view kVersion = "0.1.0";

struct PipelineConfig {
    std::size_t patch_size = 256;
    std::size_t cell_size = 8;
    std::size_t coeffs = 36;
    std::size_t global_coeffs = 1024;
    DescriptorKind descriptor = DescriptorKind::BpdLdct;

    double clahe_clip = 2.0;
    std::size_t clahe_stage1_tiles = 8;
    std::size_t clahe_stage2_tiles = 4;
    bool tiles_are_pixels = false;

    bool smote = true;
    std::size_t smote_k = 5;

    double svm_c = 10.0;
    std::optional<double> svm_gamma; // empty = auto
    bool grid_search = false;
    std::size_t inner_folds = 3;
    double tol = 1e-3;

    std::size_t folds = 5;
    bool stratify = true;
    std::uint64_t seed = 42;
    std::size_t jobs = 1;
    bool verbose = false;
};

// One configurable setting. The same table drives config files
// (`name=value`) and command-line flags (`--name value`, or bare `--name` for
// switches).
struct ConfigKey {
    std::string name;
    std::string help;
    bool is_switch;
    std::function<void(PipelineConfig&, std::string_view)> apply;
    std::function<std::string(const PipelineConfig&)> show;
};

const std::vector<ConfigKey>& config_keys();

// Unknown keys and unparsable values throw.
void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value);
void apply_config_text(PipelineConfig& cfg, std::string_view text, const std::string& source = "<config>");
void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path);

// Checks cross-field constraints: M divides N, 1 <= L <= M^2 (and <= 63 for
// bpd-ldct), K >= 2, clip > 1, ...
void validate(const PipelineConfig& cfg);

// Every setting, in table order, as (name, value) pairs.
std::vector<std::pair<std::string, std::string>> echo(const PipelineConfig& cfg);

PreprocessSettings preprocess_settings(const PipelineConfig& cfg);
DescriptorConfig descriptor_config(const PipelineConfig& cfg);
ExperimentConfig experiment_config(const PipelineConfig& cfg);

} // namespace thyrotex
