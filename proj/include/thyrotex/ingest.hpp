#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace thyrotex {

enum class Diagnosis { Benign, Malignant };
enum class Tirads { T2, T3, T4a, T4b, T4c, T5, Unknown };

std::string_view to_string(Diagnosis d);
std::string_view to_string(Tirads t);
Diagnosis parse_diagnosis(std::string_view text);
Tirads parse_tirads(std::string_view text);

// benign pairs with {2, 3, unknown}; malignant with {4a, 4b, 4c, 5, unknown}.
bool consistent(Diagnosis d, Tirads t);

struct ManifestEntry {
    std::string image_path;
    Diagnosis diagnosis;
    Tirads tirads;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
    // Directory that relative image paths are resolved against.
    std::filesystem::path base_dir;

    std::filesystem::path resolve(const ManifestEntry& entry) const;
};

// CSV with header `path,diagnosis,tirads`; '#' lines and blank lines skipped.
Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(std::istream& in, const std::string& source_name = "<manifest>");

enum class Stage { StageI, StageII };

std::string_view to_string(Stage s);
Stage parse_stage(std::string_view text);

// Stage I: benign=0, malignant=1. Stage II: TI-RADS 4 (4a/4b/4c)=0, TI-RADS 5=1.
struct StageLabel {
    Stage stage;
    int class_id;
};

struct LabeledPath {
    std::string image_path;
    StageLabel label;
};

struct StageLabelling {
    std::vector<LabeledPath> samples;
    // Malignant entries dropped from Stage II for lack of a TI-RADS score.
    std::size_t excluded_unknown = 0;
};

StageLabelling stage_labels(const Manifest& manifest, Stage stage);

} // namespace thyrotex
