#pragma once

#include "thyrotex/config.hpp"
#include "thyrotex/dataset.hpp"
#include "thyrotex/eval.hpp"
#include "thyrotex/ingest.hpp"
#include "thyrotex/svm.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace thyrotex {

// Rows of a feature file: `sample_id,label,f0..f{dim-1}`.
struct FeatureTable {
    std::size_t dim = 0;
    std::vector<std::string> ids;
    std::vector<int> labels;
    std::vector<double> values; // row-major

    std::size_t size() const { return ids.size(); }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

void write_features(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable read_features(const std::filesystem::path& path);

// key=value sidecar files.
using Metadata = std::vector<std::pair<std::string, std::string>>;
void write_metadata(const std::filesystem::path& path, const Metadata& meta);
Metadata read_metadata(const std::filesystem::path& path);
std::filesystem::path metadata_path(const std::filesystem::path& data_file);

struct IndexEntry {
    std::string sample_id;
    std::filesystem::path patch; // relative to the index file's directory
    Diagnosis diagnosis;
    Tirads tirads;
};

std::vector<IndexEntry> read_index(const std::filesystem::path& path);

struct SampleFailure {
    std::string sample_id;
    std::string message;
};

struct PreprocessOutcome {
    std::size_t written = 0;
    std::vector<SampleFailure> failures;
};

// Writes patch_NNNNN.pgm per manifest entry plus index.csv
// (`sample_id,patch,diagnosis,tirads`) and index.meta into out_dir. Failed
// samples are collected and left out of the index.
PreprocessOutcome cmd_preprocess(const Manifest& manifest, const std::filesystem::path& out_dir,
                                 const PipelineConfig& cfg,
                                 const std::optional<std::filesystem::path>& debug_dir = std::nullopt);

// Extracts features for every indexed patch. The label column carries the
// benign/malignant class; a .meta sidecar records the descriptor settings.
FeatureTable cmd_extract(const std::filesystem::path& index_path, const std::filesystem::path& out_path,
                         const PipelineConfig& cfg);

// Joins features with stage labels by sample_id. Without a manifest the
// feature file's own label column is used.
LabeledDataset join_labels(const FeatureTable& features, const std::optional<Manifest>& manifest, Stage stage,
                           std::vector<std::string>* ids = nullptr);

struct EvaluateOutputs {
    EvalReport report;
    std::optional<SvmModel> model;
};

// Writes report.csv, summary.txt, report.meta and predictions.csv into
// out_dir; with model_out, also fits one model on all samples and writes it
// plus train_predictions.csv.
EvaluateOutputs cmd_evaluate(const std::filesystem::path& features_path, const std::optional<Manifest>& manifest,
                             Stage stage, const PipelineConfig& cfg, const std::filesystem::path& out_dir,
                             const std::optional<std::filesystem::path>& model_out = std::nullopt);

// Writes `sample_id,label,score` in input order.
void cmd_predict(const std::filesystem::path& model_path, const std::filesystem::path& features_path,
                 const std::filesystem::path& out_path);

// Collects the avg row of each report into `name,pre,f1,spec,sen,acc,avg`.
// Inputs are report.csv files or directories containing one; names come from
// `name=path` syntax or the report's metadata.
std::string cmd_report(const std::vector<std::string>& inputs, const std::filesystem::path& out_path);

// In-memory run: load, preprocess, extract, label and cross-validate.
EvalReport run_experiment(const Manifest& manifest, Stage stage, const PipelineConfig& cfg);

} // namespace thyrotex
