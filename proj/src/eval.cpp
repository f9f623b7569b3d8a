#include "thyrotex/eval.hpp"

#include "thyrotex/balance.hpp"
#include "thyrotex/csv.hpp"
#include "thyrotex/error.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

namespace thyrotex {

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int positive) {
    if (y_true.size() != y_pred.size())
        throw Error("label length mismatch: " + std::to_string(y_true.size()) + " vs " + std::to_string(y_pred.size()));
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool actual = y_true[i] == positive, predicted = y_pred[i] == positive;
        if (actual && predicted) ++cm.tp;
        else if (actual) ++cm.fn;
        else if (predicted) ++cm.fp;
        else ++cm.tn;
    }
    return cm;
}

namespace {

double ratio(std::size_t num, std::size_t den, unsigned flag, unsigned& undefined) {
    if (den == 0) {
        undefined |= flag;
        return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

Metrics metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw Error("metrics of an empty confusion matrix");
    Metrics m;
    m.spec = ratio(cm.tn, cm.tn + cm.fp, kSpecUndefined, m.undefined);
    m.sens = ratio(cm.tp, cm.tp + cm.fn, kSensUndefined, m.undefined);
    m.pre = ratio(cm.tp, cm.tp + cm.fp, kPreUndefined, m.undefined);
    if (m.pre + m.sens > 0.0) {
        m.f1 = 2.0 * m.pre * m.sens / (m.pre + m.sens);
    } else {
        m.f1 = 0.0;
        m.undefined |= kF1Undefined;
    }
    m.acc = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    return m;
}

std::string describe_flags(unsigned undefined) {
    std::string out;
    auto add = [&](unsigned bit, const char* name) {
        if (undefined & bit) out += (out.empty() ? "" : ",") + std::string(name);
    };
    add(kSpecUndefined, "spec");
    add(kSensUndefined, "sen");
    add(kPreUndefined, "pre");
    add(kF1Undefined, "f1");
    return out.empty() ? "" : "undefined:" + out;
}

namespace {

std::string join_reals(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + csv::format_real(v[i]);
    return out;
}

FoldResult run_fold(const LabeledDataset& data, const FoldSplit& split, std::size_t f, const ExperimentConfig& config,
                    std::vector<Prediction>& predictions) {
    const std::uint64_t fold_seed = config.seed + f;
    FoldResult result;
    result.test_indices = split.folds[f];
    LabeledDataset train_set = data.subset(split.training(f));
    result.train_original = train_set.size();
    if (config.smote) {
        auto balanced = smote(train_set, config.smote_k, fold_seed);
        result.train_synthetic = balanced.data.size() - balanced.original_count;
        train_set = std::move(balanced.data);
    }

    TrainConfig svm = config.svm;
    if (config.grid_search) {
        // Gamma candidates scale the fold's own auto width; inner SMOTE runs on
        // the original training part.
        const LabeledDataset original = data.subset(split.training(f));
        const double base = auto_gamma(original);
        std::vector<double> gammas;
        for (double m : config.gamma_multipliers) gammas.push_back(base * m);
        GridSearchOptions options;
        if (config.smote) options.smote_k = config.smote_k;
        options.tol = config.svm.tol;
        const auto best = grid_search(original, config.c_grid, gammas, config.inner_folds, fold_seed, options);
        svm.C = best.config.C;
        svm.gamma = best.config.gamma;
    }
    const auto trained = train_with_stats(train_set, svm);
    result.C = trained.model.C;
    result.gamma = trained.model.gamma;
    result.iterations = trained.iterations;
    result.converged = trained.converged;

    std::vector<int> truth, predicted;
    for (auto idx : result.test_indices) {
        const auto p = predict(trained.model, data.features(idx));
        predictions[idx] = p;
        truth.push_back(data.label(idx));
        predicted.push_back(p.label);
    }
    result.cm = confusion(truth, predicted, 1);
    result.metrics = metrics(result.cm);
    return result;
}

} // namespace

EvalReport evaluate_dataset(const LabeledDataset& data, const ExperimentConfig& config) {
    if (data.empty()) throw Error("no samples to evaluate");
    const FoldSplit split = config.stratify ? stratified_kfold(data.labels(), config.folds, config.seed)
                                            : random_kfold(data.size(), config.folds, config.seed);
    EvalReport report;
    report.per_fold.resize(split.k());
    report.predictions.assign(data.size(), Prediction{0, 0.0});

    std::vector<std::exception_ptr> errors(split.k());
    auto work = [&](std::size_t f) {
        try {
            report.per_fold[f] = run_fold(data, split, f, config, report.predictions);
        } catch (...) {
            errors[f] = std::current_exception();
        }
    };
    const std::size_t jobs = std::clamp<std::size_t>(config.jobs, 1, split.k());
    if (jobs == 1) {
        for (std::size_t f = 0; f < split.k(); ++f) work(f);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                for (std::size_t f = next++; f < split.k(); f = next++) work(f);
            });
    }
    for (std::size_t f = 0; f < split.k(); ++f) {
        if (!errors[f]) continue;
        try {
            std::rethrow_exception(errors[f]);
        } catch (const std::exception& e) {
            throw Error("fold " + std::to_string(f + 1) + " failed: " + e.what());
        }
    }

    const double k = static_cast<double>(split.k());
    for (const auto& fold : report.per_fold) {
        report.averaged.pre += fold.metrics.pre / k;
        report.averaged.f1 += fold.metrics.f1 / k;
        report.averaged.spec += fold.metrics.spec / k;
        report.averaged.sens += fold.metrics.sens / k;
        report.averaged.acc += fold.metrics.acc / k;
        report.averaged.undefined |= fold.metrics.undefined;
        report.pooled_cm += fold.cm;
    }
    report.avg = report.averaged.average();
    report.pooled = metrics(report.pooled_cm);

    report.config_echo = {
        {"folds", std::to_string(config.folds)},
        {"stratify", config.stratify ? "true" : "false"},
        {"seed", std::to_string(config.seed)},
        {"smote", config.smote ? "true" : "false"},
        {"smote_k", std::to_string(config.smote_k)},
        {"svm_c", csv::format_real(config.svm.C)},
        {"svm_gamma", config.svm.gamma ? csv::format_real(*config.svm.gamma) : "auto"},
        {"tol", csv::format_real(config.svm.tol)},
        {"grid_search", config.grid_search ? "true" : "false"},
        {"c_grid", join_reals(config.c_grid)},
        {"gamma_multipliers", join_reals(config.gamma_multipliers)},
        {"inner_folds", std::to_string(config.inner_folds)},
        {"samples", std::to_string(data.size())},
        {"class0", std::to_string(data.count(0))},
        {"class1", std::to_string(data.count(1))},
        {"dim", std::to_string(data.dim())},
    };
    return report;
}

std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
    return buf;
}

namespace {

std::string metric_row(const std::string& label, const Metrics& m, double avg) {
    return label + "," + percent(m.pre) + "," + percent(m.f1) + "," + percent(m.spec) + "," + percent(m.sens) + "," +
           percent(m.acc) + "," + percent(avg) + "\n";
}

} // namespace

std::string report_csv(const EvalReport& report) {
    std::string out = "fold,pre,f1,spec,sen,acc,avg\n";
    for (std::size_t f = 0; f < report.per_fold.size(); ++f)
        out += metric_row(std::to_string(f + 1), report.per_fold[f].metrics, report.per_fold[f].metrics.average());
    out += metric_row("avg", report.averaged, report.avg);
    return out;
}

std::string report_summary(const EvalReport& report) {
    std::ostringstream out;
    out << "configuration\n";
    for (const auto& [k, v] : report.config_echo) out << "  " << k << " = " << v << "\n";
    out << "\nper fold (%)\n";
    out << "  fold    Pre      F1    Spec     Sen     Acc     Avg  |  C  gamma  train+synthetic  test  tp fn tn fp\n";
    char line[256];
    for (std::size_t f = 0; f < report.per_fold.size(); ++f) {
        const auto& r = report.per_fold[f];
        const auto& m = r.metrics;
        std::snprintf(line, sizeof line, "  %4zu %6.2f  %6.2f  %6.2f  %6.2f  %6.2f  %6.2f  |  %s  %s  %zu+%zu  %zu  %zu %zu %zu %zu",
                      f + 1, m.pre * 100, m.f1 * 100, m.spec * 100, m.sens * 100, m.acc * 100, m.average() * 100,
                      csv::format_real(r.C).c_str(), csv::format_real(r.gamma).c_str(), r.train_original,
                      r.train_synthetic, r.test_indices.size(), r.cm.tp, r.cm.fn, r.cm.tn, r.cm.fp);
        out << line;
        if (m.undefined) out << "  [" << describe_flags(m.undefined) << "]";
        if (!r.converged) out << "  [iteration bound reached]";
        out << "\n";
    }
    const auto& a = report.averaged;
    std::snprintf(line, sizeof line, "\nmacro average (headline)\n  Pre %s  F1 %s  Spec %s  Sen %s  Acc %s  Avg %s",
                  percent(a.pre).c_str(), percent(a.f1).c_str(), percent(a.spec).c_str(), percent(a.sens).c_str(),
                  percent(a.acc).c_str(), percent(report.avg).c_str());
    out << line << "\n";
    const auto& p = report.pooled;
    std::snprintf(line, sizeof line, "pooled confusion matrix (tp=%zu fn=%zu tn=%zu fp=%zu)\n  Pre %s  F1 %s  Spec %s  Sen %s  Acc %s  Avg %s",
                  report.pooled_cm.tp, report.pooled_cm.fn, report.pooled_cm.tn, report.pooled_cm.fp,
                  percent(p.pre).c_str(), percent(p.f1).c_str(), percent(p.spec).c_str(), percent(p.sens).c_str(),
                  percent(p.acc).c_str(), percent(p.average()).c_str());
    out << line << "\n";
    return out.str();
}

} // namespace thyrotex
