#pragma once

#include "thyrotex/dataset.hpp"
#include "thyrotex/folds.hpp"
#include "thyrotex/svm.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace thyrotex {

struct ConfusionMatrix {
    std::size_t tp = 0, fn = 0, tn = 0, fp = 0;

    std::size_t total() const { return tp + fn + tn + fp; }
    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp; fn += o.fn; tn += o.tn; fp += o.fp;
        return *this;
    }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int positive = 1);

// Bits set in Metrics::undefined when a ratio had a zero denominator.
enum MetricFlag : unsigned {
    kSpecUndefined = 1u << 0,
    kSensUndefined = 1u << 1,
    kPreUndefined = 1u << 2,
    kF1Undefined = 1u << 3,
};

struct Metrics {
    double spec = 0.0, sens = 0.0, pre = 0.0, f1 = 0.0, acc = 0.0;
    unsigned undefined = 0;

    // Mean of the five metrics.
    double average() const { return (pre + f1 + spec + sens + acc) / 5.0; }
};

// Spec = TN/(TN+FP), Sens = TP/(TP+FN), Pre = TP/(TP+FP),
// F1 = 2 Pre Sens/(Pre+Sens), Acc = (TP+TN)/total. 0/0 gives 0 and a flag.
Metrics metrics(const ConfusionMatrix& cm);

std::string describe_flags(unsigned undefined);

struct ExperimentConfig {
    std::size_t folds = 5;
    bool stratify = true;
    std::uint64_t seed = 42;
    bool smote = true;
    std::size_t smote_k = 5;
    TrainConfig svm;
    bool grid_search = false;
    std::vector<double> c_grid{0.1, 1.0, 10.0, 100.0};
    // Multiples of auto_gamma on the fold's training data.
    std::vector<double> gamma_multipliers{0.01, 0.1, 1.0, 10.0};
    std::size_t inner_folds = 3;
    std::size_t jobs = 1;
};

struct FoldResult {
    std::vector<std::size_t> test_indices;
    ConfusionMatrix cm;
    Metrics metrics;
    double C = 0.0;
    double gamma = 0.0;
    std::size_t train_original = 0;
    std::size_t train_synthetic = 0;
    std::size_t iterations = 0;
    bool converged = true;
};

struct EvalReport {
    std::vector<FoldResult> per_fold;
    Metrics averaged;                   // macro average over folds
    double avg = 0.0;                   // mean of the five averaged metrics
    ConfusionMatrix pooled_cm;
    Metrics pooled;
    std::vector<Prediction> predictions; // out-of-fold, indexed like the input
    std::vector<std::pair<std::string, std::string>> config_echo;
};

// K-fold protocol on precomputed features: per fold, SMOTE on the training
// part only, optional grid search on the training part, train, predict the
// held-out part. Fold f uses seed + f for its own random draws.
EvalReport evaluate_dataset(const LabeledDataset& data, const ExperimentConfig& config);

// `fold,pre,f1,spec,sen,acc,avg` rows (percent, 2 decimals) plus an `avg` row.
std::string report_csv(const EvalReport& report);
std::string report_summary(const EvalReport& report);

std::string percent(double fraction);

} // namespace thyrotex
