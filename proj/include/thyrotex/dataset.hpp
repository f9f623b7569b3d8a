#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace thyrotex {

// Feature vectors with binary labels, stored row-major in one buffer.
class LabeledDataset {
public:
    LabeledDataset() = default;
    explicit LabeledDataset(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }

    // Throws on a dimension mismatch or a label outside {0, 1}.
    void add(std::span<const double> features, int label);

    std::span<const double> features(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
    int label(std::size_t i) const { return labels_[i]; }
    std::span<const int> labels() const { return labels_; }

    std::size_t count(int label) const;

    LabeledDataset subset(std::span<const std::size_t> indices) const;

    friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> values_;
    std::vector<int> labels_;
};

} // namespace thyrotex
