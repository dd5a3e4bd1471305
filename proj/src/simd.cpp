#include "stopdet/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace stopdet::simd {

namespace {

struct Table {
  Isa isa;
  double (*dot)(const double*, const double*, std::size_t);
  double (*sq_dist)(const double*, const double*, std::size_t);
};

constexpr Table kScalar{Isa::scalar, &scalar::dot, &scalar::sq_dist};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Table kAvx2{Isa::avx2, &avx2::dot, &avx2::sq_dist};
#endif
#if defined(__aarch64__)
constexpr Table kNeon{Isa::neon, &neon::dot, &neon::sq_dist};
#endif

const Table* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &kScalar;
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::avx2:
      return &kAvx2;
#endif
#if defined(__aarch64__)
    case Isa::neon:
      return &kNeon;
#endif
    default:
      return nullptr;
  }
}

Isa detect() {
  const char* env = std::getenv("STOPDET_SIMD");
  if (env != nullptr) {
    const std::string want(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (want == isa_name(isa) && isa_available(isa)) return isa;
    }
    // Unknown or unavailable request falls through to auto-detection.
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (isa_available(Isa::avx2)) return Isa::avx2;
#endif
#if defined(__aarch64__)
  if (isa_available(Isa::neon)) return Isa::neon;
#endif
  return Isa::scalar;
}

std::atomic<const Table*>& active_table() {
  static std::atomic<const Table*> table{table_for(detect())};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return active_table().load(std::memory_order_relaxed)->isa; }

void set_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("simd: ISA not available on this CPU: " +
                                std::string(isa_name(isa)));
  }
  active_table().store(table_for(isa), std::memory_order_relaxed);
}

double dot(const double* a, const double* b, std::size_t n) {
  return active_table().load(std::memory_order_relaxed)->dot(a, b, n);
}

double sq_dist(const double* a, const double* b, std::size_t n) {
  return active_table().load(std::memory_order_relaxed)->sq_dist(a, b, n);
}

}  // namespace stopdet::simd
