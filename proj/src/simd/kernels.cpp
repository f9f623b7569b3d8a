#include "thyrotex/simd/kernels.hpp"

#include "kernels_internal.hpp"

#include <cstdlib>
#include <string>

namespace thyrotex::simd {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

} // namespace detail

std::string_view isa_name(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
    }
    return "unknown";
}

const KernelTable& scalar_kernels() {
    static const KernelTable table{Isa::Scalar, &detail::dot_scalar,
                                   &detail::squared_distance_scalar};
    return table;
}

const KernelTable* kernels_for(Isa isa) {
    switch (isa) {
    case Isa::Scalar:
        return &scalar_kernels();
    case Isa::Avx2:
#if defined(THYROTEX_HAVE_AVX2)
        if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
            static const KernelTable table{Isa::Avx2, &detail::dot_avx2,
                                           &detail::squared_distance_avx2};
            return &table;
        }
#endif
        return nullptr;
    case Isa::Neon:
#if defined(THYROTEX_HAVE_NEON)
        {
            static const KernelTable table{Isa::Neon, &detail::dot_neon,
                                           &detail::squared_distance_neon};
            return &table;
        }
#else
        return nullptr;
#endif
    }
    return nullptr;
}

namespace {

const KernelTable& resolve() {
    if (const char* forced = std::getenv("THYROTEX_SIMD")) {
        const std::string name(forced);
        for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
            if (name == isa_name(isa)) {
                if (const auto* table = kernels_for(isa)) return *table;
            }
        }
    }
    for (Isa isa : {Isa::Avx2, Isa::Neon}) {
        if (const auto* table = kernels_for(isa)) return *table;
    }
    return scalar_kernels();
}

} // namespace

const KernelTable& active() {
    static const KernelTable& table = resolve();
    return table;
}

void multiply_transposed(const KernelTable& kt, const double* a, std::size_t rows_a,
                         const double* b, std::size_t rows_b, std::size_t depth, double* out) {
    for (std::size_t i = 0; i < rows_a; ++i) {
        const double* ai = a + i * depth;
        double* oi = out + i * rows_b;
        for (std::size_t j = 0; j < rows_b; ++j) oi[j] = kt.dot(ai, b + j * depth, depth);
    }
}

} // namespace thyrotex::simd
