#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "stopdet/cholesky.hpp"
#include "stopdet/data.hpp"
#include "stopdet/oracle.hpp"
#include "stopdet/rng.hpp"

using namespace stopdet;

namespace {

SymMatrix random_symmetric(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  SymMatrix a(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) a.at(i, j) = rng.next_gaussian();
  }
  return a;
}

SymMatrix kernel_matrix(std::size_t n, std::uint64_t seed, const KernelSpec& spec,
                        double sigma2) {
  const Dataset ds = synth_gaussian(n, 3, seed);
  return assemble_matrix(ds.points, spec, sigma2);
}

}  // namespace

TEST_SUITE_BEGIN("oracle");

TEST_CASE("sym_eigenvalues basics") {
  SUBCASE("diagonal matrices") {
    SymMatrix a(2);
    a.at(0, 0) = 2.0;
    a.at(1, 1) = 3.0;
    auto eig = oracle::sym_eigenvalues(a);
    std::sort(eig.begin(), eig.end());
    CHECK(eig[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(eig[1] == doctest::Approx(3.0).epsilon(1e-12));
  }
  SUBCASE("2x2 with known spectrum") {
    SymMatrix a(2);
    a.at(0, 0) = 2.0;
    a.at(1, 0) = 1.0;
    a.at(1, 1) = 2.0;
    auto eig = oracle::sym_eigenvalues(a);
    std::sort(eig.begin(), eig.end());
    CHECK(eig[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eig[1] == doctest::Approx(3.0).epsilon(1e-12));
  }
  SUBCASE("trace and Frobenius identities on random symmetric matrices") {
    for (const std::uint64_t seed : {1u, 2u, 3u}) {
      const SymMatrix a = random_symmetric(40, seed);
      double trace = 0.0;
      double frob2 = 0.0;
      for (std::size_t i = 0; i < 40; ++i) {
        trace += a.at(i, i);
        for (std::size_t j = 0; j <= i; ++j) {
          frob2 += (i == j ? 1.0 : 2.0) * a.at(i, j) * a.at(i, j);
        }
      }
      double sum = 0.0;
      double sum2 = 0.0;
      for (const double lambda : oracle::sym_eigenvalues(a)) {
        sum += lambda;
        sum2 += lambda * lambda;
      }
      CHECK(sum == doctest::Approx(trace).epsilon(1e-10));
      CHECK(sum2 == doctest::Approx(frob2).epsilon(1e-10));
    }
  }
}

TEST_CASE("logdet_reference") {
  SUBCASE("identity and diagonal") {
    SymMatrix eye(5);
    for (std::size_t i = 0; i < 5; ++i) eye.at(i, i) = 1.0;
    CHECK(oracle::logdet_reference(eye) == doctest::Approx(0.0));
    SymMatrix d(2);
    d.at(0, 0) = 2.0;
    d.at(1, 1) = 3.0;
    CHECK(oracle::logdet_reference(d) == doctest::Approx(std::log(6.0)).epsilon(1e-12));
  }
  SUBCASE("agrees with the factorization route") {
    const KernelSpec spec{KernelFamily::rbf, 1.0, 1.0};
    const SymMatrix a = kernel_matrix(90, 11, spec, 0.001);
    SymMatrix c(a);
    cholesky_full(c);
    CHECK(oracle::logdet_reference(a) ==
          doctest::Approx(log_det_from_factor(c)).epsilon(1e-8));
  }
  SUBCASE("invariant under point permutation") {
    const KernelSpec spec{KernelFamily::ou, 1.0, 1.5};
    const Dataset ds = synth_gaussian(50, 3, 321);
    const double v1 =
        oracle::logdet_reference(assemble_matrix(ds.points, spec, 0.001));
    const Dataset shuffled = permute(ds, 5150);
    const double v2 =
        oracle::logdet_reference(assemble_matrix(shuffled.points, spec, 0.001));
    CHECK(v1 == doctest::Approx(v2).epsilon(1e-8));
  }
  SUBCASE("rejects indefinite input") {
    SymMatrix a(2);
    a.at(0, 0) = 1.0;
    a.at(1, 0) = 2.0;
    a.at(1, 1) = 1.0;
    CHECK_THROWS_AS(oracle::logdet_reference(a), std::invalid_argument);
  }
  SUBCASE("converges on a spectrum with a large cluster at sigma2") {
    // Short lengthscale in 2-D piles hundreds of eigenvalues up at sigma2
    // while the top of the spectrum sits orders of magnitude higher; the QL
    // deflation threshold has to account for the matrix norm or the sweep
    // stalls on this input.
    const Dataset ds = synth_gaussian(466, 2, derive_seed(1001, 66));
    const KernelSpec spec{KernelFamily::rbf, 1.0, std::exp(-1.0)};
    const SymMatrix a = assemble_matrix(ds.points, spec, 1e-3);
    const double eig = oracle::logdet_reference(a);
    SymMatrix c(a);
    cholesky_full(c);
    CHECK(eig == doctest::Approx(log_det_from_factor(c)).epsilon(1e-8));
  }
}

TEST_CASE("gp_posterior_variance") {
  const KernelSpec spec{KernelFamily::rbf, 1.0, 1.0};
  const double sigma2 = 1e-3;

  SUBCASE("empty prefix returns the prior") {
    const PointSet prefix;
    const std::vector<double> x{0.4, -0.2, 0.0};
    CHECK(oracle::gp_posterior_variance(prefix, x, spec, sigma2) ==
          doctest::Approx(1.0 + sigma2).epsilon(1e-14));
  }
  SUBCASE("duplicate conditioning point") {
    PointSet prefix(1, 1);
    prefix.row(0)[0] = 0.7;
    const std::vector<double> x{0.7};
    const double got = oracle::gp_posterior_variance(prefix, x, spec, sigma2);
    CHECK(got == doctest::Approx(1.001 - 1.0 / 1.001).epsilon(1e-12));
  }
  SUBCASE("monotone non-increasing in the prefix at a fixed query") {
    const Dataset ds = synth_gaussian(25, 2, 777);
    const std::vector<double> x{0.1, 0.3};
    const KernelSpec ou{KernelFamily::ou, 1.0, 1.0};
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m <= 25; m += 5) {
      PointSet prefix(m, 2);
      for (std::size_t i = 0; i < m; ++i) {
        const auto src = ds.points.row(i);
        std::copy(src.begin(), src.end(), prefix.row(i).begin());
      }
      const double v = oracle::gp_posterior_variance(prefix, x, ou, 0.01);
      CHECK(v <= prev + 1e-10);
      prev = v;
    }
  }
}

TEST_CASE("check_decreasing_expectation") {
  const double sigma2 = 1e-3;
  SUBCASE("single index passes trivially") {
    const auto report = oracle::check_decreasing_expectation(
        {KernelFamily::rbf, 1.0, 1.0}, sigma2, 1, 2, 50, 7);
    CHECK(report.pass);
  }
  SUBCASE("degenerate point-mass law decreases deterministically") {
    const auto report = oracle::check_decreasing_expectation(
        {KernelFamily::rbf, 1.0, 1.0}, sigma2, 8, 2, 10, 7, 0.0);
    CHECK(report.pass);
    CHECK(report.means.front() == doctest::Approx(std::log(1.0 + sigma2)).epsilon(1e-9));
    for (std::size_t j = 0; j + 1 < report.means.size(); ++j) {
      CHECK(report.means[j + 1] < report.means[j]);
    }
    CHECK(report.means.back() > std::log(sigma2));
  }
  SUBCASE("gaussian law at moderate size") {
    const auto report = oracle::check_decreasing_expectation(
        {KernelFamily::rbf, 1.0, 1.0}, sigma2, 20, 2, 1500, 99);
    CHECK(report.pass);
  }
}

TEST_CASE("check_guarantee") {
  const double sigma2 = 1e-3;
  SUBCASE("tiny r forces completion and zero failures") {
    const auto report = oracle::check_guarantee({KernelFamily::rbf, 1.0, 1.0}, sigma2,
                                                0.1, 1e-12, 40, 3, 20, 5);
    CHECK(report.failures == 0);
    CHECK(report.stopped_count == 0);
    CHECK(report.failure_rate == 0.0);
  }
  SUBCASE("huge r stops immediately and still satisfies the bound") {
    const auto report = oracle::check_guarantee({KernelFamily::rbf, 1.0, 3.0}, sigma2,
                                                0.1, 10.0, 40, 3, 20, 5);
    CHECK(report.failures == 0);
    CHECK(report.stopped_count > 0);
  }
  SUBCASE("blocked variant satisfies the same bound") {
    const auto report =
        oracle::check_guarantee({KernelFamily::rbf, 1.0, std::exp(2.0)}, sigma2, 0.1,
                                0.1, 300, 5, 40, 12321, 0, oracle::GuaranteeVariant::blocked);
    CHECK(report.failure_rate <= 0.15);
    CHECK(report.stopped_count > 0);
  }
  SUBCASE("records are reproducible from the seed split") {
    const auto r1 = oracle::check_guarantee({KernelFamily::rbf, 1.0, 2.0}, sigma2, 0.1,
                                            0.2, 30, 3, 8, 77, 1);
    const auto r2 = oracle::check_guarantee({KernelFamily::rbf, 1.0, 2.0}, sigma2, 0.1,
                                            0.2, 30, 3, 8, 77, 2);
    REQUIRE(r1.records.size() == r2.records.size());
    for (std::size_t t = 0; t < r1.records.size(); ++t) {
      CHECK(r1.records[t].seed == r2.records[t].seed);
      CHECK(r1.records[t].estimate == r2.records[t].estimate);
      CHECK(r1.records[t].tau == r2.records[t].tau);
    }
  }
}

TEST_CASE("binomial_upper95") {
  // 0 failures in 200 trials: the bound solves (1-p)^200 = 0.05.
  const double want = 1.0 - std::pow(0.05, 1.0 / 200.0);
  CHECK(oracle::binomial_upper95(0, 200) == doctest::Approx(want).epsilon(1e-6));
  CHECK(oracle::binomial_upper95(200, 200) == doctest::Approx(1.0));
  CHECK(oracle::binomial_upper95(10, 200) > 10.0 / 200.0);
}

TEST_SUITE_END();
