#include <doctest.h>

#include <cmath>

#include "stopdet/cholesky.hpp"
#include "stopdet/data.hpp"
#include "stopdet/kernels.hpp"
#include "stopdet/oracle.hpp"
#include "stopdet/pivoted.hpp"

using namespace stopdet;

namespace {

SymMatrix diag_matrix(std::initializer_list<double> values) {
  SymMatrix a(values.size());
  std::size_t i = 0;
  for (const double v : values) {
    a.at(i, i) = v;
    ++i;
  }
  return a;
}

SymMatrix kernel_matrix(std::size_t n, std::uint64_t seed, double sigma2,
                        double lengthscale = 1.0) {
  const Dataset ds = synth_gaussian(n, 3, seed);
  const KernelSpec spec{KernelFamily::rbf, 1.0, lengthscale};
  return assemble_matrix(ds.points, spec, sigma2);
}

}  // namespace

TEST_SUITE_BEGIN("pivoted");

TEST_CASE("pivot order follows the residual magnitudes") {
  const SymMatrix a = diag_matrix({3.0, 2.0, 1.0});
  PivotedOptions opts;
  opts.diag_tol = 0.5;
  const PivotedOutcome out = pivoted_cholesky(a, 1.0, opts);
  CHECK(out.rank == 3);
  CHECK(out.reason == PivotStopReason::completed);
  CHECK(out.pivot_order == std::vector<std::size_t>{0, 1, 2});
  CHECK(out.log_det == doctest::Approx(std::log(6.0)).epsilon(1e-12));
  CHECK(out.estimate == doctest::Approx(std::log(6.0)).epsilon(1e-12));
}

TEST_CASE("stops before the first step when residuals are already small") {
  const SymMatrix a = diag_matrix({1.0, 1.0, 1.0, 1.0});
  PivotedOptions opts;
  opts.diag_tol = 2.0;
  const PivotedOutcome out = pivoted_cholesky(a, 0.5, opts);
  CHECK(out.rank == 0);
  CHECK(out.reason == PivotStopReason::diag_tolerance);
  CHECK(out.upper == doctest::Approx(0.0));
  CHECK(out.history.size() == 1);
  CHECK(out.history[0].max_residual == doctest::Approx(1.0));
}

TEST_CASE("duplicate-point residual after one pivot") {
  const double sigma2 = 1e-3;
  const PointSet pts(2, 1);  // two identical points
  const KernelSpec spec{KernelFamily::rbf, 1.0, 1.0};
  const SymMatrix a = assemble_matrix(pts, spec, sigma2);
  PivotedOptions opts;
  opts.max_rank = 1;
  const PivotedOutcome out = pivoted_cholesky(a, sigma2, opts);
  REQUIRE(out.rank == 1);
  const double expect = 1.001 - 1.0 / 1.001;  // theta + sigma2 - theta^2/(theta+sigma2)
  CHECK(out.history.back().max_residual == doctest::Approx(expect).epsilon(1e-12));
  CHECK(out.history.back().max_residual == doctest::Approx(2.0 * sigma2).epsilon(1e-2));
}

TEST_CASE("full run reproduces the log-determinant") {
  const double sigma2 = 0.001;
  const SymMatrix a = kernel_matrix(80, 4242, sigma2);
  PivotedOptions opts;
  opts.diag_tol = 0.0;  // run to completion
  const PivotedOutcome out = pivoted_cholesky(a, sigma2, opts);
  CHECK(out.rank == 80);
  CHECK(out.reason == PivotStopReason::completed);
  const double want = oracle::logdet_reference(a);
  CHECK(out.log_det == doctest::Approx(want).epsilon(1e-8));
  CHECK(out.lower == doctest::Approx(out.upper).epsilon(1e-12));
}

TEST_CASE("run invariants") {
  const double sigma2 = 0.001;
  const SymMatrix a = kernel_matrix(60, 17, sigma2, 2.0);
  PivotedOptions opts;
  opts.diag_tol = 0.0;
  const PivotedOutcome out = pivoted_cholesky(a, sigma2, opts);
  REQUIRE(out.rank == 60);
  const double exact = out.log_det;

  SUBCASE("selected pivot values are non-increasing") {
    for (std::size_t s = 0; s + 1 < out.history.size(); ++s) {
      CHECK(out.history[s].max_residual >= out.history[s + 1].max_residual - 1e-12);
    }
  }
  SUBCASE("upper bound decreases and sandwiches the exact value") {
    for (std::size_t s = 0; s + 1 < out.history.size(); ++s) {
      CHECK(out.history[s + 1].upper <= out.history[s].upper + 1e-9);
    }
    for (const PivotBounds& b : out.history) {
      CHECK(b.upper >= exact - 1e-9);
      CHECK(b.lower <= exact + 1e-9);
    }
  }
  SUBCASE("residual floor holds at every step") {
    for (std::size_t s = 0; s + 1 < out.history.size(); ++s) {
      CHECK(out.history[s].min_residual >= sigma2 - 1e-9);
    }
  }
}

TEST_CASE("shared stopping conditions") {
  const double sigma2 = 0.001;
  const SymMatrix a = kernel_matrix(150, 3131, sigma2, 4.0);
  const StoppingConfig cfg = make_config(150, sigma2, 0.1, 0.5, std::log(1.001));
  PivotedOptions opts;
  opts.diag_tol = 0.0;
  opts.config = &cfg;
  const PivotedOutcome out = pivoted_cholesky(a, sigma2, opts);
  REQUIRE(out.reason == PivotStopReason::conditions);
  CHECK(out.rank < 150);
  CHECK(stop_conditions_hold(out.lower, out.upper, cfg.r));
  CHECK(out.estimate == doctest::Approx(0.5 * (out.lower + out.upper)));
  const double exact = oracle::logdet_reference(a);
  CHECK(std::abs(exact - out.estimate) / std::abs(exact) <= 0.5);
}

TEST_CASE("rank budget stops the run") {
  const double sigma2 = 0.001;
  const SymMatrix a = kernel_matrix(50, 5, sigma2);
  PivotedOptions opts;
  opts.max_rank = 20;
  const PivotedOutcome out = pivoted_cholesky(a, sigma2, opts);
  CHECK(out.rank == 20);
  CHECK(out.reason == PivotStopReason::rank_budget);
  CHECK(out.factor_col(out.pivot_order[0]).size() == 20);
}

TEST_CASE("guaranteed_precision_at_stop") {
  SUBCASE("exact completion certifies zero") {
    const SymMatrix a = diag_matrix({2.0, 0.5});
    PivotedOptions opts;
    opts.diag_tol = 0.0;
    const PivotedOutcome out = pivoted_cholesky(a, 0.5, opts);
    const GuaranteedPrecision gp = guaranteed_precision_at_stop(out);
    CHECK(gp.defined);
    CHECK(gp.value == doctest::Approx(0.0));
  }
  SUBCASE("interval value matches the shared bound") {
    PivotedOutcome out;
    out.lower = -44.0;
    out.upper = -40.0;
    const GuaranteedPrecision gp = guaranteed_precision_at_stop(out);
    CHECK(gp.defined);
    CHECK(gp.value == doctest::Approx(0.05));
  }
  SUBCASE("sign-mixed interval is flagged with the sentinel") {
    PivotedOutcome out;
    out.lower = -1.0;
    out.upper = 1.0;
    const GuaranteedPrecision gp = guaranteed_precision_at_stop(out);
    CHECK_FALSE(gp.defined);
    CHECK(gp.value == doctest::Approx(1.0));
  }
}

TEST_CASE("input validation") {
  const SymMatrix a = diag_matrix({1.0, 1.0});
  PivotedOptions opts;
  CHECK_THROWS_AS(pivoted_cholesky(a, 0.0, opts), std::invalid_argument);
  opts.diag_tol = -1.0;
  CHECK_THROWS_AS(pivoted_cholesky(a, 0.5, opts), std::invalid_argument);
}

TEST_SUITE_END();
