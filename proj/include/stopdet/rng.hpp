#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace stopdet {

// mt19937_64 with explicit draw helpers. The <random> distributions are
// implementation-defined, so seeded streams would differ across standard
// libraries; these helpers keep every seeded result reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; draws come in cached pairs.
  double next_gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = next_unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  // Unbiased integer in [0, bound) by rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t draw;
    do {
      draw = gen_();
    } while (draw >= limit);
    return draw % bound;
  }

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Seed-splitting rule used for independent trials and permutations.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  return root ^ index;
}

}  // namespace stopdet
