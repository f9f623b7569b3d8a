#pragma once

#include "thyrotex/dataset.hpp"

#include <cstddef>
#include <cstdint>

namespace thyrotex {

struct SmoteResult {
    LabeledDataset data;
    // Originals occupy [0, original_count); synthetics follow.
    std::size_t original_count = 0;
    int minority_label = 0;
};

// SMOTE oversampling of the smaller class up to the size of the larger one.
//
// Draw order per synthetic sample, all from one Rng(seed): minority sample
// index, neighbour rank in [0, k), interpolation factor u in [0, 1). Neighbours
// are the k nearest minority samples by Euclidean distance, ties going to the
// smaller original index. Balanced input is returned unchanged.
SmoteResult smote(const LabeledDataset& data, std::size_t k, std::uint64_t seed);

} // namespace thyrotex
