#pragma once

#include <cstddef>

namespace thyrotex::simd::detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
double squared_distance_scalar(const double* a, const double* b, std::size_t n);

#if defined(THYROTEX_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
double squared_distance_avx2(const double* a, const double* b, std::size_t n);
#endif

#if defined(THYROTEX_HAVE_NEON)
double dot_neon(const double* a, const double* b, std::size_t n);
double squared_distance_neon(const double* a, const double* b, std::size_t n);
#endif

} // namespace thyrotex::simd::detail
