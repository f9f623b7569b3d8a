#include "thyrotex/svm.hpp"

#include "thyrotex/balance.hpp"
#include "thyrotex/csv.hpp"
#include "thyrotex/error.hpp"
#include "thyrotex/folds.hpp"
#include "thyrotex/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

namespace thyrotex {

double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma) {
    if (x.size() != z.size())
        throw Error("kernel dimension mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(z.size()));
    if (!(gamma > 0.0)) throw Error("RBF gamma must be positive");
    return std::exp(-gamma * simd::squared_distance(x, z));
}

double auto_gamma(const LabeledDataset& data) {
    const std::size_t n = data.size(), dim = data.dim();
    if (n == 0 || dim == 0) throw Error("cannot derive gamma from an empty dataset");
    double total_var = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += data.features(i)[d];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dv = data.features(i)[d] - mean;
            var += dv * dv;
        }
        total_var += var / static_cast<double>(n);
    }
    const double mean_var = total_var / static_cast<double>(dim);
    return mean_var > 0.0 ? 1.0 / (static_cast<double>(dim) * mean_var) : 1.0;
}

namespace {

constexpr double kTau = 1e-12;
constexpr std::size_t kFullMatrixLimit = 4096;

// Rows of Q_ij = y_i y_j K(x_i, x_j), precomputed for small n and computed on
// demand otherwise.
class QMatrix {
public:
    QMatrix(const LabeledDataset& data, std::span<const double> y, double gamma)
        : data_(data), y_(y), gamma_(gamma), n_(data.size()), full_(n_ <= kFullMatrixLimit) {
        if (full_) {
            matrix_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i) {
                matrix_[i * n_ + i] = 1.0;
                for (std::size_t j = i + 1; j < n_; ++j) {
                    const double q = y_[i] * y_[j] * kernel(i, j);
                    matrix_[i * n_ + j] = q;
                    matrix_[j * n_ + i] = q;
                }
            }
        } else {
            scratch_[0].resize(n_);
            scratch_[1].resize(n_);
        }
    }

    // Valid until the next call with the same slot.
    std::span<const double> row(std::size_t i, int slot) {
        if (full_) return {matrix_.data() + i * n_, n_};
        auto& buf = scratch_[slot];
        for (std::size_t j = 0; j < n_; ++j) buf[j] = i == j ? 1.0 : y_[i] * y_[j] * kernel(i, j);
        return buf;
    }

private:
    double kernel(std::size_t i, std::size_t j) const {
        return std::exp(-gamma_ * simd::squared_distance(data_.features(i), data_.features(j)));
    }

    const LabeledDataset& data_;
    std::span<const double> y_;
    double gamma_;
    std::size_t n_;
    bool full_;
    std::vector<double> matrix_;
    std::vector<double> scratch_[2];
};

double dual_objective(std::span<const double> alpha, std::span<const double> grad) {
    // With G = Q a - e: D(a) = sum a - a^T Q a / 2 = -sum a_i (G_i - 1) / 2.
    double acc = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) acc += alpha[i] * (grad[i] - 1.0);
    return -0.5 * acc;
}

} // namespace

TrainResult train_with_stats(const LabeledDataset& data, const TrainConfig& cfg) {
    const std::size_t n = data.size();
    if (n == 0) throw Error("cannot train on an empty dataset");
    if (data.count(0) == 0 || data.count(1) == 0) throw Error("training data must contain both classes");
    if (!(cfg.C > 0.0)) throw Error("C must be positive");
    if (!(cfg.tol > 0.0)) throw Error("tolerance must be positive");
    for (std::size_t i = 0; i < n; ++i)
        for (double v : data.features(i))
            if (!std::isfinite(v)) throw Error("non-finite feature in training sample " + std::to_string(i));
    const double gamma = cfg.gamma ? *cfg.gamma : auto_gamma(data);
    if (!(gamma > 0.0)) throw Error("RBF gamma must be positive");
    const std::size_t max_iter = cfg.max_iterations.value_or(std::max<std::size_t>(100000, 100 * n));
    if (max_iter < 1) throw Error("iteration bound must be at least 1");

    const double C = cfg.C;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = data.label(i) == 1 ? 1.0 : -1.0;
    std::vector<double> alpha(n, 0.0), grad(n, -1.0);
    QMatrix q(data, y, gamma);

    auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < C : alpha[t] > 0.0; };
    auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < C; };

    TrainResult result;
    double objective = 0.0;
    while (true) {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(t) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        if (i == n || j == n || gmax - gmin <= cfg.tol) {
            result.converged = true;
            break;
        }
        if (result.iterations >= max_iter) {
            std::clog << "warning: SMO stopped at the iteration bound (" << max_iter << ") with gap "
                      << gmax - gmin << "\n";
            break;
        }
        ++result.iterations;

        const auto qi = q.row(i, 0);
        const auto qj = q.row(j, 1);
        const double old_i = alpha[i], old_j = alpha[j];
        if (y[i] != y[j]) {
            double quad = qi[i] + qj[j] + 2.0 * qi[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
            }
            if (diff > 0.0) {
                if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
            } else {
                if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; }
            }
        } else {
            double quad = qi[i] + qj[j] - 2.0 * qi[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
            } else {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
            }
            if (sum > C) {
                if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
            }
        }
        const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) grad[t] += qi[t] * di + qj[t] * dj;

        if (cfg.monitor_objective) {
            const double next = dual_objective(alpha, grad);
            if (next < objective - 1e-10 * std::max(1.0, std::abs(objective))) ++result.objective_decreases;
            objective = next;
        }
    }

    // Offset: mean of y_i G_i over free vectors, else the midpoint of the
    // feasible interval.
    double ub = std::numeric_limits<double>::infinity(), lb = -ub, free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= C) {
            if (y[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++free_count;
            free_sum += yg;
        }
    }
    const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (ub + lb) / 2.0;

    SvmModel& model = result.model;
    model.dim = data.dim();
    model.bias = -rho;
    model.gamma = gamma;
    model.C = C;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            model.dual_coefs.push_back(alpha[t] * y[t]);
            const auto f = data.features(t);
            model.support_vectors.insert(model.support_vectors.end(), f.begin(), f.end());
        }
    }
    result.objective = dual_objective(alpha, grad);
    result.alpha = std::move(alpha);
    return result;
}

SvmModel train(const LabeledDataset& data, const TrainConfig& cfg) { return train_with_stats(data, cfg).model; }

Prediction predict(const SvmModel& model, std::span<const double> x) {
    if (x.size() != model.dim)
        throw Error("feature dimension " + std::to_string(x.size()) + " does not match model dimension " +
                    std::to_string(model.dim));
    const auto& kt = simd::active();
    double score = model.bias;
    for (std::size_t i = 0; i < model.support_count(); ++i)
        score += model.dual_coefs[i] * std::exp(-model.gamma * kt.squared_distance(model.support_vector(i).data(),
                                                                                   x.data(), model.dim));
    return {score >= 0.0 ? 1 : 0, score};
}

std::vector<Prediction> predict_all(const SvmModel& model, const LabeledDataset& data) {
    std::vector<Prediction> out;
    out.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out.push_back(predict(model, data.features(i)));
    return out;
}

KktAudit kkt_audit(const LabeledDataset& data, std::span<const double> alpha, const SvmModel& model, double tol) {
    if (alpha.size() != data.size()) throw Error("alpha count does not match the dataset");
    KktAudit audit;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double y = data.label(i) == 1 ? 1.0 : -1.0;
        const double margin = y * predict(model, data.features(i)).score;
        double violation = 0.0;
        if (alpha[i] <= 0.0) violation = (1.0 - tol) - margin;
        else if (alpha[i] >= model.C) violation = margin - (1.0 + tol);
        else violation = std::abs(margin - 1.0) - tol;
        if (violation > 0.0) {
            ++audit.violations;
            audit.worst = std::max(audit.worst, violation);
        }
    }
    return audit;
}

namespace {
constexpr const char* kModelMagic = "thyrotex-svm";
constexpr int kModelVersion = 1;
} // namespace

void save_model(std::ostream& out, const SvmModel& model) {
    out << kModelMagic << " " << kModelVersion << "\n";
    out << "gamma " << csv::format_real(model.gamma) << "\n";
    out << "C " << csv::format_real(model.C) << "\n";
    out << "bias " << csv::format_real(model.bias) << "\n";
    out << "dim " << model.dim << "\n";
    out << "support_vectors " << model.support_count() << "\n";
    for (std::size_t i = 0; i < model.support_count(); ++i) {
        out << csv::format_real(model.dual_coefs[i]);
        for (double v : model.support_vector(i)) out << ' ' << csv::format_real(v);
        out << '\n';
    }
}

void save_model(const std::filesystem::path& path, const SvmModel& model) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write model " + path.string());
    save_model(out, model);
    if (!out) throw Error("write failed for " + path.string());
}

namespace {

std::string expect_key(std::istream& in, const std::string& key) {
    std::string line;
    if (!std::getline(in, line)) throw Error("model file truncated before '" + key + "'");
    std::istringstream ls(line);
    std::string k, v;
    ls >> k >> v;
    if (k != key || v.empty()) throw Error("model file: expected '" + key + "', found '" + line + "'");
    return v;
}

} // namespace

SvmModel load_model(std::istream& in) {
    const auto version = expect_key(in, kModelMagic);
    if (version != std::to_string(kModelVersion)) throw Error("unsupported model schema version " + version);
    SvmModel model;
    model.gamma = csv::parse_real(expect_key(in, "gamma"), "gamma");
    model.C = csv::parse_real(expect_key(in, "C"), "C");
    model.bias = csv::parse_real(expect_key(in, "bias"), "bias");
    model.dim = static_cast<std::size_t>(csv::parse_int(expect_key(in, "dim"), "dim"));
    const auto count = static_cast<std::size_t>(csv::parse_int(expect_key(in, "support_vectors"), "support_vectors"));
    std::string line;
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line)) throw Error("model file truncated at support vector " + std::to_string(i));
        std::istringstream ls(line);
        std::string token;
        std::vector<double> row;
        while (ls >> token) row.push_back(csv::parse_real(token, "support vector"));
        if (row.size() != model.dim + 1)
            throw Error("model support vector " + std::to_string(i) + " has " + std::to_string(row.size()) +
                        " values, expected " + std::to_string(model.dim + 1));
        model.dual_coefs.push_back(row[0]);
        model.support_vectors.insert(model.support_vectors.end(), row.begin() + 1, row.end());
    }
    return model;
}

SvmModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model " + path.string());
    return load_model(in);
}

GridSearchResult grid_search(const LabeledDataset& data, std::span<const double> c_grid,
                             std::span<const double> gamma_grid, std::size_t inner_folds, std::uint64_t seed,
                             const GridSearchOptions& options) {
    if (c_grid.empty() || gamma_grid.empty()) throw Error("grid search needs non-empty C and gamma grids");
    if (inner_folds < 2) throw Error("grid search needs at least 2 inner folds");
    std::vector<double> cs(c_grid.begin(), c_grid.end()), gammas(gamma_grid.begin(), gamma_grid.end());
    std::sort(cs.begin(), cs.end());
    std::sort(gammas.begin(), gammas.end());

    const FoldSplit split = stratified_kfold(data.labels(), inner_folds, seed);
    std::vector<LabeledDataset> train_sets, test_sets;
    for (std::size_t f = 0; f < split.k(); ++f) {
        LabeledDataset tr = data.subset(split.training(f));
        if (options.smote_k) {
            const std::size_t minority = std::min(tr.count(0), tr.count(1));
            if (minority >= 2) tr = smote(tr, std::min(*options.smote_k, minority - 1), seed + f).data;
        }
        train_sets.push_back(std::move(tr));
        test_sets.push_back(data.subset(split.folds[f]));
    }

    GridSearchResult best;
    bool have = false;
    for (double c : cs) {
        for (double g : gammas) {
            TrainConfig cfg;
            cfg.C = c;
            cfg.gamma = g;
            cfg.tol = options.tol;
            double acc_sum = 0.0;
            for (std::size_t f = 0; f < split.k(); ++f) {
                const auto model = train(train_sets[f], cfg);
                std::size_t correct = 0;
                for (std::size_t i = 0; i < test_sets[f].size(); ++i)
                    if (predict(model, test_sets[f].features(i)).label == test_sets[f].label(i)) ++correct;
                acc_sum += static_cast<double>(correct) / static_cast<double>(test_sets[f].size());
            }
            const double acc = acc_sum / static_cast<double>(split.k());
            if (!have || acc > best.accuracy) {
                have = true;
                best.config = cfg;
                best.accuracy = acc;
            }
        }
    }
    return best;
}

} // namespace thyrotex
