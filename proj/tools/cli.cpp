#include "cli.hpp"

#include "thyrotex/config.hpp"
#include "thyrotex/error.hpp"
#include "thyrotex/ingest.hpp"
#include "thyrotex/pipeline.hpp"
#include "thyrotex/simd/kernels.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>

namespace thyrotex::cli {

namespace {

struct Invocation {
    std::string config_path;
    // Flag values as given on the command line, applied over the config file.
    std::map<std::string, std::string> values;
    std::map<std::string, bool> switches;

    std::string manifest, out, debug_dir, index, features, stage = "1", model_out, model;
    std::vector<std::string> inputs;
};

void build(CLI::App& app, Invocation& inv) {
    app.description("Thyroid ultrasound texture classification: preprocessing, BPD-LDCT/LDCT/DCT/ILBP "
                    "descriptors, SMOTE, RBF-SVM and K-fold evaluation.");
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--config", inv.config_path, "Flat key=value config file; flags override its values");
    for (const auto& key : config_keys()) {
        if (key.is_switch) {
            app.add_flag_callback("--" + key.name, [&inv, name = key.name] { inv.switches[name] = true; }, key.help);
        } else {
            app.add_option_function<std::string>(
                "--" + key.name, [&inv, name = key.name](const std::string& v) { inv.values[name] = v; }, key.help);
        }
    }

    auto* pre = app.add_subcommand("preprocess", "ROI extraction, normalisation and two-stage CLAHE per image");
    pre->add_option("--manifest", inv.manifest, "Manifest CSV (path,diagnosis,tirads)")->required();
    pre->add_option("--out", inv.out, "Output directory for patches and index.csv")->required();
    pre->add_option("--debug-dir", inv.debug_dir, "Also dump mask, ROI crop and enhanced patch as PGM");

    auto* ext = app.add_subcommand("extract", "Compute descriptor features for preprocessed patches");
    ext->add_option("--index", inv.index, "index.csv written by preprocess")->required();
    ext->add_option("--out", inv.out, "Feature CSV to write (a .meta sidecar is written next to it)")->required();

    auto* eva = app.add_subcommand("evaluate", "K-fold cross-validation of the SVM on a feature file");
    eva->add_option("--features", inv.features, "Feature CSV")->required();
    eva->add_option("--manifest", inv.manifest, "Manifest for stage labels (required for stage 2)");
    eva->add_option("--stage", inv.stage, "Classification stage: 1 (benign/malignant) or 2 (TI-RADS 4/5)");
    eva->add_option("--out", inv.out, "Output directory for report.csv and summary.txt")->required();
    eva->add_option("--model-out", inv.model_out, "Fit a model on all samples and save it here");

    auto* prd = app.add_subcommand("predict", "Apply a saved model to a feature file");
    prd->add_option("--model", inv.model, "Model file from evaluate --model-out")->required();
    prd->add_option("--features", inv.features, "Feature CSV")->required();
    prd->add_option("--out", inv.out, "Predictions CSV to write")->required();

    auto* rep = app.add_subcommand("report", "Merge report.csv files into one comparison table");
    rep->add_option("inputs", inv.inputs, "report.csv files or directories, optionally name=path")->required();
    rep->add_option("--out", inv.out, "Merged CSV to write")->required();
}

PipelineConfig resolve(const Invocation& inv) {
    PipelineConfig cfg;
    if (!inv.config_path.empty()) apply_config_file(cfg, inv.config_path);
    for (const auto& [k, v] : inv.values) apply_setting(cfg, k, v);
    for (const auto& [k, v] : inv.switches) apply_setting(cfg, k, v ? "true" : "false");
    validate(cfg);
    return cfg;
}

} // namespace

std::string help_text() {
    CLI::App app{"Thyroid ultrasound texture classification", "thyrotex"};
    Invocation inv;
    build(app, inv);
    return app.help();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Thyroid ultrasound texture classification", "thyrotex"};
    Invocation inv;
    build(app, inv);
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
    }

    try {
        const PipelineConfig cfg = resolve(inv);
        if (cfg.verbose) err << "kernels: " << simd::isa_name(simd::active().isa) << "\n";
        const std::string& cmd = app.get_subcommands().front()->get_name();
        if (cmd == "preprocess") {
            const Manifest manifest = load_manifest(inv.manifest);
            std::optional<std::filesystem::path> debug;
            if (!inv.debug_dir.empty()) debug = inv.debug_dir;
            const auto outcome = cmd_preprocess(manifest, inv.out, cfg, debug);
            out << "wrote " << outcome.written << " patches to " << inv.out << "\n";
            for (const auto& f : outcome.failures) err << "error: " << f.sample_id << ": " << f.message << "\n";
            return outcome.failures.empty() ? 0 : 1;
        }
        if (cmd == "extract") {
            const auto table = cmd_extract(inv.index, inv.out, cfg);
            out << "wrote " << table.size() << " rows of " << table.dim << " " << to_string(cfg.descriptor)
                << " features to " << inv.out << "\n";
            return 0;
        }
        if (cmd == "evaluate") {
            std::optional<Manifest> manifest;
            if (!inv.manifest.empty()) manifest = load_manifest(inv.manifest);
            std::optional<std::filesystem::path> model_out;
            if (!inv.model_out.empty()) model_out = inv.model_out;
            const auto result = cmd_evaluate(inv.features, manifest, parse_stage(inv.stage), cfg, inv.out, model_out);
            out << report_summary(result.report);
            return 0;
        }
        if (cmd == "predict") {
            cmd_predict(inv.model, inv.features, inv.out);
            out << "wrote predictions to " << inv.out << "\n";
            return 0;
        }
        if (cmd == "report") {
            out << cmd_report(inv.inputs, inv.out);
            return 0;
        }
        err << "unknown command " << cmd << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace thyrotex::cli
