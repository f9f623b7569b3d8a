#pragma once

#include "thyrotex/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace thyrotex {

// exp(-gamma * |x - z|^2)
double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma);

// 1 / (dim * mean per-feature variance); 1.0 when every feature is constant.
double auto_gamma(const LabeledDataset& data);

struct TrainConfig {
    double C = 10.0;
    std::optional<double> gamma; // empty = auto_gamma
    double tol = 1e-3;
    // Pair-update bound; empty = max(100000, 100 * n).
    std::optional<std::size_t> max_iterations;
    // Recompute the dual objective after every update and count decreases.
    bool monitor_objective = false;
};

// Trained RBF classifier. decision(x) = sum_i coef_i K(sv_i, x) + bias, where
// coef_i = alpha_i * y_i and y = +1 for label 1, -1 for label 0.
struct SvmModel {
    std::size_t dim = 0;
    std::vector<double> support_vectors; // row-major, dual_coefs.size() x dim
    std::vector<double> dual_coefs;
    double bias = 0.0;
    double gamma = 1.0;
    double C = 1.0;

    std::size_t support_count() const { return dual_coefs.size(); }
    std::span<const double> support_vector(std::size_t i) const { return {support_vectors.data() + i * dim, dim}; }

    friend bool operator==(const SvmModel&, const SvmModel&) = default;
};

struct TrainResult {
    SvmModel model;
    std::vector<double> alpha; // one per training sample
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t objective_decreases = 0;
    double objective = 0.0; // final dual objective
};

// Soft-margin SMO with maximal-violating-pair selection. Stops when the
// violation gap drops to cfg.tol or the iteration bound is reached.
TrainResult train_with_stats(const LabeledDataset& data, const TrainConfig& cfg);
SvmModel train(const LabeledDataset& data, const TrainConfig& cfg);

struct Prediction {
    int label;
    double score;
};

Prediction predict(const SvmModel& model, std::span<const double> x);
std::vector<Prediction> predict_all(const SvmModel& model, const LabeledDataset& data);

struct KktAudit {
    std::size_t violations = 0;
    double worst = 0.0; // largest violation amount
};

// Checks each training point's KKT condition against the model's decision
// function: alpha = 0 needs y f >= 1 - tol, 0 < alpha < C needs |y f - 1| <= tol,
// alpha = C needs y f <= 1 + tol.
KktAudit kkt_audit(const LabeledDataset& data, std::span<const double> alpha, const SvmModel& model, double tol);

void save_model(std::ostream& out, const SvmModel& model);
void save_model(const std::filesystem::path& path, const SvmModel& model);
SvmModel load_model(std::istream& in);
SvmModel load_model(const std::filesystem::path& path);

struct GridSearchOptions {
    // Apply SMOTE with this k inside each inner training split.
    std::optional<std::size_t> smote_k;
    double tol = 1e-3;
};

struct GridSearchResult {
    TrainConfig config;
    double accuracy = 0.0; // mean inner-fold accuracy of the chosen point
};

// Picks the (C, gamma) with the best mean inner-fold accuracy on `data`.
// Ties go to the smaller C, then the smaller gamma.
GridSearchResult grid_search(const LabeledDataset& data, std::span<const double> c_grid,
                             std::span<const double> gamma_grid, std::size_t inner_folds, std::uint64_t seed,
                             const GridSearchOptions& options = {});

} // namespace thyrotex
