#include "thyrotex/folds.hpp"

#include "thyrotex/error.hpp"
#include "thyrotex/rng.hpp"

#include <algorithm>
#include <string>

namespace thyrotex {

std::vector<std::size_t> FoldSplit::training(std::size_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t g = 0; g < folds.size(); ++g)
        if (g != f) out.insert(out.end(), folds[g].begin(), folds[g].end());
    std::sort(out.begin(), out.end());
    return out;
}

FoldSplit stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw Error("fold count must be at least 2");
    std::vector<std::vector<std::size_t>> by_class(2);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw Error("labels must be 0 or 1");
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (int c = 0; c < 2; ++c) {
        const auto n = by_class[static_cast<std::size_t>(c)].size();
        if (n > 0 && n < k)
            throw Error("class " + std::to_string(c) + " has " + std::to_string(n) + " samples, fewer than " +
                        std::to_string(k) + " folds");
    }
    if (labels.size() < k) throw Error("fewer samples than folds");

    Rng rng(seed);
    FoldSplit split{std::vector<std::vector<std::size_t>>(k)};
    std::size_t next = 0;
    for (auto& members : by_class) {
        rng.shuffle(members.begin(), members.end());
        for (auto idx : members) {
            split.folds[next].push_back(idx);
            next = (next + 1) % k;
        }
    }
    for (auto& f : split.folds) std::sort(f.begin(), f.end());
    return split;
}

FoldSplit random_kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw Error("fold count must be at least 2");
    if (n < k) throw Error("fewer samples than folds");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx.begin(), idx.end());
    FoldSplit split{std::vector<std::vector<std::size_t>>(k)};
    for (std::size_t i = 0; i < n; ++i) split.folds[i % k].push_back(idx[i]);
    for (auto& f : split.folds) std::sort(f.begin(), f.end());
    return split;
}

} // namespace thyrotex
