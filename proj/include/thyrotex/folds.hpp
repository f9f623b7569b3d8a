#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace thyrotex {

struct FoldSplit {
    std::vector<std::vector<std::size_t>> folds;

    std::size_t k() const { return folds.size(); }
    // Indices outside fold `f`, ascending.
    std::vector<std::size_t> training(std::size_t f) const;
};

// Shuffles each class's indices with Rng(seed) (class 0 first, then class 1)
// and deals them round-robin into k folds. The dealing position carries over
// from one class to the next so total fold sizes differ by at most one.
// Requires every present class to have at least k samples.
FoldSplit stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

// Shuffle all indices, deal round-robin; no class balancing.
FoldSplit random_kfold(std::size_t n, std::size_t k, std::uint64_t seed);

} // namespace thyrotex
