#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "stopdet/rng.hpp"
#include "stopdet/simd.hpp"

using namespace stopdet;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.next_gaussian();
  return v;
}

}  // namespace

TEST_SUITE_BEGIN("simd");

TEST_CASE("small exact values") {
  const double a[] = {1.0, 2.0, 3.0};
  const double b[] = {4.0, 5.0, 6.0};
  CHECK(simd::scalar::dot(a, b, 3) == doctest::Approx(32.0));
  CHECK(simd::scalar::sq_dist(a, b, 3) == doctest::Approx(27.0));
  CHECK(simd::scalar::dot(a, b, 0) == 0.0);
  CHECK(simd::scalar::sq_dist(a, b, 0) == 0.0);
}

TEST_CASE("dispatch matches the scalar reference") {
  Rng rng(20240521);
  const std::size_t lengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17,
                                 31, 32, 33, 63, 100, 255, 1000, 4097};
  for (const std::size_t n : lengths) {
    const auto a = random_vec(rng, n, 2.0);
    const auto b = random_vec(rng, n, 0.5);
    double mag = 1e-300;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);

    const double want_dot = simd::scalar::dot(a.data(), b.data(), n);
    const double want_sq = simd::scalar::sq_dist(a.data(), b.data(), n);
    CHECK(std::abs(simd::dot(a.data(), b.data(), n) - want_dot) <= 1e-13 * mag);
    CHECK(std::abs(simd::sq_dist(a.data(), b.data(), n) - want_sq) <=
          1e-13 * (want_sq + 1e-300));
  }
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 variants agree with scalar") {
  if (!simd::isa_available(simd::Isa::avx2)) return;
  Rng rng(77);
  for (std::size_t n : {1u, 4u, 7u, 8u, 12u, 64u, 513u}) {
    const auto a = random_vec(rng, n, 1.0);
    const auto b = random_vec(rng, n, 1.0);
    double mag = 1e-300;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    CHECK(std::abs(simd::avx2::dot(a.data(), b.data(), n) -
                   simd::scalar::dot(a.data(), b.data(), n)) <= 1e-13 * mag);
    const double sq_ref = simd::scalar::sq_dist(a.data(), b.data(), n);
    CHECK(std::abs(simd::avx2::sq_dist(a.data(), b.data(), n) - sq_ref) <=
          1e-13 * (sq_ref + 1e-300));
  }
}
#endif

#if defined(__aarch64__)
TEST_CASE("neon variants agree with scalar") {
  if (!simd::isa_available(simd::Isa::neon)) return;
  Rng rng(77);
  for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 64u, 513u}) {
    const auto a = random_vec(rng, n, 1.0);
    const auto b = random_vec(rng, n, 1.0);
    double mag = 1e-300;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    CHECK(std::abs(simd::neon::dot(a.data(), b.data(), n) -
                   simd::scalar::dot(a.data(), b.data(), n)) <= 1e-13 * mag);
    const double sq_ref = simd::scalar::sq_dist(a.data(), b.data(), n);
    CHECK(std::abs(simd::neon::sq_dist(a.data(), b.data(), n) - sq_ref) <=
          1e-13 * (sq_ref + 1e-300));
  }
}
#endif

TEST_CASE("set_isa rejects unavailable targets and switches active tables") {
  const simd::Isa initial = simd::active_isa();
  CHECK(simd::isa_available(simd::Isa::scalar));
  simd::set_isa(simd::Isa::scalar);
  CHECK(simd::active_isa() == simd::Isa::scalar);
#if defined(__x86_64__) || defined(_M_X64)
  CHECK_THROWS_AS(simd::set_isa(simd::Isa::neon), std::invalid_argument);
#else
  CHECK_THROWS_AS(simd::set_isa(simd::Isa::avx2), std::invalid_argument);
#endif
  simd::set_isa(initial);
  CHECK(simd::active_isa() == initial);
}

TEST_SUITE_END();
