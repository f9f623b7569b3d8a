#include "thyrotex/dataset.hpp"

#include "thyrotex/error.hpp"

#include <algorithm>
#include <string>

namespace thyrotex {

void LabeledDataset::add(std::span<const double> features, int label) {
    if (empty() && dim_ == 0) dim_ = features.size();
    if (features.size() != dim_)
        throw Error("feature dimension " + std::to_string(features.size()) + " does not match dataset dimension " +
                    std::to_string(dim_));
    if (label != 0 && label != 1) throw Error("labels must be 0 or 1, got " + std::to_string(label));
    values_.insert(values_.end(), features.begin(), features.end());
    labels_.push_back(label);
}

std::size_t LabeledDataset::count(int label) const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
    LabeledDataset out(dim_);
    for (auto i : indices) out.add(features(i), labels_[i]);
    return out;
}

} // namespace thyrotex
