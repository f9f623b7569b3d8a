#include "thyrotex/balance.hpp"

#include "thyrotex/error.hpp"
#include "thyrotex/rng.hpp"
#include "thyrotex/simd/kernels.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace thyrotex {

SmoteResult smote(const LabeledDataset& data, std::size_t k, std::uint64_t seed) {
    const std::size_t ones = data.count(1), zeros = data.count(0);
    SmoteResult result{data, data.size(), ones < zeros ? 1 : 0};
    if (ones == zeros) return result;

    const int minority = result.minority_label;
    const std::size_t minority_count = std::min(ones, zeros);
    const std::size_t needed = std::max(ones, zeros) - minority_count;
    if (minority_count < 2) throw Error("SMOTE needs at least 2 minority samples, got " + std::to_string(minority_count));
    if (k < 1 || k > minority_count - 1)
        throw Error("SMOTE k=" + std::to_string(k) + " must lie in [1, " + std::to_string(minority_count - 1) +
                    "] for " + std::to_string(minority_count) + " minority samples");

    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (data.label(i) == minority) members.push_back(i);

    // Scalar distances keep neighbour ranking identical on every CPU.
    const auto& kt = simd::scalar_kernels();
    const std::size_t dim = data.dim();
    std::vector<std::vector<std::size_t>> neighbours(members.size());
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t a = 0; a < members.size(); ++a) {
        ranked.clear();
        const auto fa = data.features(members[a]);
        for (std::size_t b = 0; b < members.size(); ++b) {
            if (a == b) continue;
            ranked.emplace_back(kt.squared_distance(fa.data(), data.features(members[b]).data(), dim), b);
        }
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end());
        for (std::size_t r = 0; r < k; ++r) neighbours[a].push_back(ranked[r].second);
    }

    Rng rng(seed);
    std::vector<double> synthetic(dim);
    for (std::size_t s = 0; s < needed; ++s) {
        const std::size_t a = rng.below(members.size());
        const std::size_t b = neighbours[a][rng.below(k)];
        const double u = rng.unit();
        const auto x = data.features(members[a]);
        const auto xn = data.features(members[b]);
        for (std::size_t d = 0; d < dim; ++d) {
            const double v = x[d] + u * (xn[d] - x[d]);
            synthetic[d] = std::clamp(v, std::min(x[d], xn[d]), std::max(x[d], xn[d]));
        }
        result.data.add(synthetic, minority);
    }
    return result;
}

} // namespace thyrotex
