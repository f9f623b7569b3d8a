#include "thyrotex/pipeline.hpp"

#include "parallel.hpp"
#include "thyrotex/balance.hpp"
#include "thyrotex/csv.hpp"
#include "thyrotex/descriptor.hpp"
#include "thyrotex/error.hpp"
#include "thyrotex/image.hpp"
#include "thyrotex/preprocess.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace fs = std::filesystem;

namespace thyrotex {

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Metadata with_prefix(const std::string& prefix, const Metadata& items) {
    Metadata out;
    for (const auto& [k, v] : items) out.emplace_back(prefix + k, v);
    return out;
}

std::string lookup(const Metadata& meta, const std::string& key, const std::string& fallback = "") {
    for (const auto& [k, v] : meta)
        if (k == key) return v;
    return fallback;
}

} // namespace

void write_features(const fs::path& path, const FeatureTable& table) {
    std::string text = "sample_id,label";
    for (std::size_t d = 0; d < table.dim; ++d) text += ",f" + std::to_string(d);
    text += "\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        text += csv::escape(table.ids[i]) + "," + std::to_string(table.labels[i]);
        for (double v : table.row(i)) text += "," + csv::format_real(v);
        text += "\n";
    }
    write_text(path, text);
}

FeatureTable read_features(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open feature file " + path.string());
    FeatureTable table;
    std::string line;
    std::size_t row = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++row;
        if (csv::is_ignorable(line)) continue;
        const auto fields = csv::split(line);
        const auto where = path.string() + " row " + std::to_string(row);
        if (!have_header) {
            if (fields.size() < 2 || fields[0] != "sample_id" || fields[1] != "label")
                throw Error(where + ": expected header 'sample_id,label,f0,...'");
            for (std::size_t d = 2; d < fields.size(); ++d)
                if (fields[d] != "f" + std::to_string(d - 2)) throw Error(where + ": bad feature column '" + fields[d] + "'");
            table.dim = fields.size() - 2;
            have_header = true;
            continue;
        }
        if (fields.size() != table.dim + 2)
            throw Error(where + ": expected " + std::to_string(table.dim + 2) + " columns, found " +
                        std::to_string(fields.size()));
        table.ids.push_back(fields[0]);
        table.labels.push_back(static_cast<int>(csv::parse_int(fields[1], "label")));
        for (std::size_t d = 2; d < fields.size(); ++d) table.values.push_back(csv::parse_real(fields[d], "feature"));
    }
    if (!have_header) throw Error(path.string() + ": missing header");
    return table;
}

void write_metadata(const fs::path& path, const Metadata& meta) {
    std::string text;
    for (const auto& [k, v] : meta) text += k + "=" + v + "\n";
    write_text(path, text);
}

Metadata read_metadata(const fs::path& path) {
    Metadata meta;
    std::istringstream in(read_text(path));
    std::string line;
    while (std::getline(in, line)) {
        if (csv::is_ignorable(line)) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error(path.string() + ": expected key=value, got '" + line + "'");
        meta.emplace_back(std::string(csv::trim(line.substr(0, eq))), std::string(csv::trim(line.substr(eq + 1))));
    }
    return meta;
}

fs::path metadata_path(const fs::path& data_file) {
    fs::path p = data_file;
    p.replace_extension(".meta");
    return p;
}

std::vector<IndexEntry> read_index(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open index " + path.string());
    std::vector<IndexEntry> entries;
    std::string line;
    bool have_header = false;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (csv::is_ignorable(line)) continue;
        const auto fields = csv::split(line);
        if (!have_header) {
            if (fields != std::vector<std::string>{"sample_id", "patch", "diagnosis", "tirads"})
                throw Error(path.string() + ": expected header 'sample_id,patch,diagnosis,tirads'");
            have_header = true;
            continue;
        }
        if (fields.size() != 4) throw Error(path.string() + " row " + std::to_string(row) + ": expected 4 columns");
        entries.push_back({fields[0], fields[1], parse_diagnosis(fields[2]), parse_tirads(fields[3])});
    }
    if (!have_header) throw Error(path.string() + ": missing header");
    return entries;
}

PreprocessOutcome cmd_preprocess(const Manifest& manifest, const fs::path& out_dir, const PipelineConfig& cfg,
                                 const std::optional<fs::path>& debug_dir) {
    validate(cfg);
    fs::create_directories(out_dir);
    if (debug_dir) fs::create_directories(*debug_dir);
    const auto settings = preprocess_settings(cfg);
    const std::size_t n = manifest.entries.size();
    std::vector<std::string> names(n), errors(n);
    for (std::size_t i = 0; i < n; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "patch_%05zu", i + 1);
        names[i] = buf;
    }

    detail::parallel_for(n, cfg.jobs, [&](std::size_t i) {
        const auto& entry = manifest.entries[i];
        try {
            const GrayImage img = load_image(manifest.resolve(entry));
            PreprocessTrace trace;
            const GrayImage patch = preprocess_image(img, settings, debug_dir ? &trace : nullptr);
            save_pgm(out_dir / (names[i] + ".pgm"), patch);
            if (debug_dir) {
                save_pgm(*debug_dir / (names[i] + "_mask.pgm"), trace.mask.to_gray());
                save_pgm(*debug_dir / (names[i] + "_roi.pgm"), trace.roi_image);
                save_pgm(*debug_dir / (names[i] + "_enhanced.pgm"), trace.enhanced);
            }
            if (cfg.verbose) std::clog << "preprocessed " << entry.image_path << "\n";
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    PreprocessOutcome outcome;
    std::string index = "sample_id,patch,diagnosis,tirads\n";
    for (std::size_t i = 0; i < n; ++i) {
        const auto& entry = manifest.entries[i];
        if (!errors[i].empty()) {
            outcome.failures.push_back({entry.image_path, errors[i]});
            continue;
        }
        index += csv::escape(entry.image_path) + "," + names[i] + ".pgm," + std::string(to_string(entry.diagnosis)) +
                 "," + std::string(to_string(entry.tirads)) + "\n";
        ++outcome.written;
    }
    write_text(out_dir / "index.csv", index);
    Metadata meta{{"tool", "thyrotex"}, {"version", std::string(kVersion)}, {"command", "preprocess"}};
    const auto echoed = with_prefix("config.", echo(cfg));
    meta.insert(meta.end(), echoed.begin(), echoed.end());
    write_metadata(out_dir / "index.meta", meta);
    return outcome;
}

FeatureTable cmd_extract(const fs::path& index_path, const fs::path& out_path, const PipelineConfig& cfg) {
    validate(cfg);
    const auto entries = read_index(index_path);
    if (entries.empty()) throw Error("no samples in index " + index_path.string());
    const auto dcfg = descriptor_config(cfg);
    const std::size_t dim = feature_dim(dcfg, cfg.patch_size);
    const fs::path base = index_path.parent_path();

    FeatureTable table;
    table.dim = dim;
    table.values.resize(entries.size() * dim);
    std::vector<std::string> errors(entries.size());
    detail::parallel_for(entries.size(), cfg.jobs, [&](std::size_t i) {
        try {
            const fs::path patch_path = entries[i].patch.is_absolute() ? entries[i].patch : base / entries[i].patch;
            const GrayImage patch = load_image(patch_path);
            if (patch.width() != cfg.patch_size || patch.height() != cfg.patch_size)
                throw Error("patch " + patch_path.string() + " is " + std::to_string(patch.width()) + "x" +
                            std::to_string(patch.height()) + ", configured patch-size is " +
                            std::to_string(cfg.patch_size));
            const auto fv = extract_features(patch, dcfg);
            if (fv.dim() != dim)
                throw Error("descriptor produced " + std::to_string(fv.dim()) + " features, expected " + std::to_string(dim));
            std::copy(fv.values.begin(), fv.values.end(), table.values.begin() + static_cast<std::ptrdiff_t>(i * dim));
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (!errors[i].empty()) throw Error(entries[i].sample_id + ": " + errors[i]);

    for (const auto& e : entries) {
        table.ids.push_back(e.sample_id);
        table.labels.push_back(e.diagnosis == Diagnosis::Malignant ? 1 : 0);
    }
    write_features(out_path, table);
    Metadata meta{{"tool", "thyrotex"},
                  {"version", std::string(kVersion)},
                  {"command", "extract"},
                  {"descriptor", std::string(to_string(cfg.descriptor))},
                  {"N", std::to_string(cfg.patch_size)},
                  {"M", std::to_string(cfg.cell_size)},
                  {"L", std::to_string(cfg.coeffs)},
                  {"L_global", std::to_string(cfg.global_coeffs)},
                  {"dim", std::to_string(dim)},
                  {"samples", std::to_string(table.size())}};
    const auto echoed = with_prefix("config.", echo(cfg));
    meta.insert(meta.end(), echoed.begin(), echoed.end());
    write_metadata(metadata_path(out_path), meta);
    return table;
}

LabeledDataset join_labels(const FeatureTable& features, const std::optional<Manifest>& manifest, Stage stage,
                           std::vector<std::string>* ids) {
    LabeledDataset data(features.dim);
    if (!manifest) {
        if (stage == Stage::StageII)
            throw Error("stage II evaluation needs the manifest for TI-RADS labels");
        for (std::size_t i = 0; i < features.size(); ++i) {
            data.add(features.row(i), features.labels[i]);
            if (ids) ids->push_back(features.ids[i]);
        }
        return data;
    }

    const auto labelling = stage_labels(*manifest, stage);
    if (labelling.excluded_unknown > 0)
        std::clog << "warning: " << labelling.excluded_unknown
                  << " malignant entries without a TI-RADS score excluded from stage II\n";
    std::unordered_map<std::string, int> labels;
    for (const auto& s : labelling.samples) labels.emplace(s.image_path, s.label.class_id);
    std::set<std::string> in_manifest;
    for (const auto& e : manifest->entries) in_manifest.insert(e.image_path);

    std::vector<std::string> orphans;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto& id = features.ids[i];
        if (!seen.insert(id).second) throw Error("duplicate sample_id '" + id + "' in feature file");
        if (!in_manifest.count(id)) {
            orphans.push_back(id + " (features only)");
            continue;
        }
        const auto it = labels.find(id);
        if (it == labels.end()) continue; // not part of this stage
        data.add(features.row(i), it->second);
        if (ids) ids->push_back(id);
    }
    for (const auto& s : labelling.samples)
        if (!seen.count(s.image_path)) orphans.push_back(s.image_path + " (manifest only)");
    if (!orphans.empty()) {
        std::string msg = "feature/label join mismatch, orphaned ids:";
        for (const auto& o : orphans) msg += "\n  " + o;
        throw Error(msg);
    }
    return data;
}

namespace {

SvmModel fit_full_model(const LabeledDataset& data, const ExperimentConfig& ex) {
    LabeledDataset train_set = data;
    if (ex.smote) train_set = smote(data, ex.smote_k, ex.seed).data;
    TrainConfig svm = ex.svm;
    if (ex.grid_search) {
        const double base = auto_gamma(data);
        std::vector<double> gammas;
        for (double m : ex.gamma_multipliers) gammas.push_back(base * m);
        GridSearchOptions options;
        if (ex.smote) options.smote_k = ex.smote_k;
        options.tol = ex.svm.tol;
        const auto best = grid_search(data, ex.c_grid, gammas, ex.inner_folds, ex.seed, options);
        svm.C = best.config.C;
        svm.gamma = best.config.gamma;
    }
    return train(train_set, svm);
}

std::string predictions_csv(const std::vector<std::string>& ids, const std::vector<Prediction>& preds) {
    std::string text = "sample_id,label,score\n";
    for (std::size_t i = 0; i < ids.size(); ++i)
        text += csv::escape(ids[i]) + "," + std::to_string(preds[i].label) + "," + csv::format_real(preds[i].score) + "\n";
    return text;
}

} // namespace

EvaluateOutputs cmd_evaluate(const fs::path& features_path, const std::optional<Manifest>& manifest, Stage stage,
                             const PipelineConfig& cfg, const fs::path& out_dir,
                             const std::optional<fs::path>& model_out) {
    validate(cfg);
    const FeatureTable features = read_features(features_path);
    std::vector<std::string> ids;
    const LabeledDataset data = join_labels(features, manifest, stage, &ids);
    if (data.empty()) throw Error("no samples to evaluate");
    const auto ex = experiment_config(cfg);

    EvaluateOutputs outputs;
    outputs.report = evaluate_dataset(data, ex);
    auto& report = outputs.report;

    Metadata meta{{"tool", "thyrotex"}, {"version", std::string(kVersion)}, {"command", "evaluate"},
                  {"stage", std::string(to_string(stage))}, {"features", features_path.filename().string()}};
    const fs::path features_meta = metadata_path(features_path);
    if (fs::exists(features_meta)) {
        const auto fmeta = read_metadata(features_meta);
        for (const char* key : {"descriptor", "N", "M", "L", "L_global"})
            meta.emplace_back(std::string("features.") + key, lookup(fmeta, key));
    }
    const auto echoed = with_prefix("config.", echo(cfg));
    meta.insert(meta.end(), echoed.begin(), echoed.end());
    for (std::size_t f = 0; f < report.per_fold.size(); ++f) {
        const auto& r = report.per_fold[f];
        const std::string p = "fold" + std::to_string(f + 1) + ".";
        meta.emplace_back(p + "C", csv::format_real(r.C));
        meta.emplace_back(p + "gamma", csv::format_real(r.gamma));
        if (r.metrics.undefined) meta.emplace_back(p + "flags", describe_flags(r.metrics.undefined));
    }
    report.config_echo.insert(report.config_echo.begin(), meta.begin(), meta.end());

    fs::create_directories(out_dir);
    write_text(out_dir / "report.csv", report_csv(report));
    write_text(out_dir / "summary.txt", report_summary(report));
    write_metadata(out_dir / "report.meta", meta);
    write_text(out_dir / "predictions.csv", predictions_csv(ids, report.predictions));

    if (model_out) {
        outputs.model = fit_full_model(data, ex);
        if (model_out->has_parent_path()) fs::create_directories(model_out->parent_path());
        save_model(*model_out, *outputs.model);
        write_text(out_dir / "train_predictions.csv", predictions_csv(ids, predict_all(*outputs.model, data)));
    }
    return outputs;
}

void cmd_predict(const fs::path& model_path, const fs::path& features_path, const fs::path& out_path) {
    const SvmModel model = load_model(model_path);
    const FeatureTable features = read_features(features_path);
    if (features.size() > 0 && features.dim != model.dim)
        throw Error("feature dimension " + std::to_string(features.dim) + " does not match model dimension " +
                    std::to_string(model.dim));
    std::vector<Prediction> preds;
    for (std::size_t i = 0; i < features.size(); ++i) preds.push_back(predict(model, features.row(i)));
    write_text(out_path, predictions_csv(features.ids, preds));
}

std::string cmd_report(const std::vector<std::string>& inputs, const fs::path& out_path) {
    if (inputs.empty()) throw Error("report needs at least one input");
    std::string csv_text = "name,pre,f1,spec,sen,acc,avg\n";
    std::string table = "name                          Pre (%)   F1 (%)  Spec (%)  Sen (%)  Acc (%)  Avg (%)\n";
    for (const auto& input : inputs) {
        std::string name;
        fs::path path = input;
        if (const auto eq = input.find('='); eq != std::string::npos) {
            name = input.substr(0, eq);
            path = input.substr(eq + 1);
        }
        if (fs::is_directory(path)) path /= "report.csv";
        if (name.empty()) {
            const fs::path meta_path = path.parent_path() / "report.meta";
            if (fs::exists(meta_path)) {
                const auto meta = read_metadata(meta_path);
                name = lookup(meta, "features.descriptor", lookup(meta, "config.descriptor"));
                const auto stage = lookup(meta, "stage");
                if (!stage.empty()) name += " (stage " + stage + ")";
            }
            if (name.empty()) name = path.parent_path().filename().string();
        }
        std::istringstream in(read_text(path));
        std::string line;
        std::vector<std::string> avg_row;
        while (std::getline(in, line)) {
            auto fields = csv::split(line);
            if (!fields.empty() && fields[0] == "avg") avg_row = std::move(fields);
        }
        if (avg_row.size() != 7) throw Error(path.string() + ": no avg row");
        csv_text += csv::escape(name);
        for (std::size_t c = 1; c < 7; ++c) csv_text += "," + avg_row[c];
        csv_text += "\n";
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-28s %8s %8s %9s %8s %8s %8s\n", name.c_str(), avg_row[1].c_str(),
                      avg_row[2].c_str(), avg_row[3].c_str(), avg_row[4].c_str(), avg_row[5].c_str(),
                      avg_row[6].c_str());
        table += buf;
    }
    write_text(out_path, csv_text);
    return table;
}

EvalReport run_experiment(const Manifest& manifest, Stage stage, const PipelineConfig& cfg) {
    validate(cfg);
    const auto labelling = stage_labels(manifest, stage);
    const auto settings = preprocess_settings(cfg);
    const auto dcfg = descriptor_config(cfg);
    const std::size_t dim = feature_dim(dcfg, cfg.patch_size);
    std::unordered_map<std::string, const ManifestEntry*> by_path;
    for (const auto& e : manifest.entries) by_path.emplace(e.image_path, &e);

    const std::size_t n = labelling.samples.size();
    std::vector<double> values(n * dim);
    std::vector<std::string> errors(n);
    detail::parallel_for(n, cfg.jobs, [&](std::size_t i) {
        try {
            const auto* entry = by_path.at(labelling.samples[i].image_path);
            const GrayImage patch = preprocess_image(load_image(manifest.resolve(*entry)), settings);
            const auto fv = extract_features(patch, dcfg);
            std::copy(fv.values.begin(), fv.values.end(), values.begin() + static_cast<std::ptrdiff_t>(i * dim));
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    LabeledDataset data(dim);
    for (std::size_t i = 0; i < n; ++i) {
        if (!errors[i].empty()) throw Error(labelling.samples[i].image_path + ": " + errors[i]);
        data.add(std::span<const double>(values.data() + i * dim, dim), labelling.samples[i].label.class_id);
    }
    return evaluate_dataset(data, experiment_config(cfg));
}

} // namespace thyrotex
