#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner-loop kernels shared by the factorization and kernel
// assembly paths. Every kernel has a scalar reference implementation; vector
// variants (AVX2 on x86-64, NEON on aarch64) are selected once at startup
// from what the CPU supports. The STOPDET_SIMD environment variable
// ("scalar", "avx2", "neon") forces a specific implementation.

namespace stopdet::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);

// Implementation used by the dispatching entry points below.
Isa active_isa();

// Force a specific implementation. Throws std::invalid_argument if the ISA
// is not available on this CPU.
void set_isa(Isa isa);

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// sum_i (a[i]-b[i])^2
double sq_dist(const double* a, const double* b, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sq_dist(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sq_dist(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
double sq_dist(const double* a, const double* b, std::size_t n);
}  // namespace neon
#endif

}  // namespace stopdet::simd
