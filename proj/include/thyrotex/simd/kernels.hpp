#pragma once

// Data-parallel inner loops shared by the DCT, RBF kernel and SMOTE
// neighbour search. Each kernel has a scalar reference implementation and
// vectorised variants; the active table is chosen once at runtime from the
// CPU's capabilities and may be forced with THYROTEX_SIMD=scalar.

#include <cstddef>
#include <span>
#include <string_view>

namespace thyrotex::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
};

// Scalar reference table; always available.
const KernelTable& scalar_kernels();

// Best table supported by the running CPU, or nullptr for an ISA that was
// not compiled in or is not supported here.
const KernelTable* kernels_for(Isa isa);

// Table used by the library. Resolved once, thread-safe.
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    return active().squared_distance(a.data(), b.data(), a.size());
}

// out[i * rows_b + j] = <a_i, b_j> for row-major a (rows_a x depth) and
// b (rows_b x depth), i.e. out = a * b^T.
void multiply_transposed(const KernelTable& kt, const double* a, std::size_t rows_a,
                         const double* b, std::size_t rows_b, std::size_t depth, double* out);

inline void multiply_transposed(const double* a, std::size_t rows_a, const double* b,
                                std::size_t rows_b, std::size_t depth, double* out) {
    multiply_transposed(active(), a, rows_a, b, rows_b, depth, out);
}

} // namespace thyrotex::simd
