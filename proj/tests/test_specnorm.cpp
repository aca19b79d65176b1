#include <cmath>

#include "doctest.h"
#include "haarlab/specnorm.hpp"
#include "oracles.hpp"

using namespace haarlab;

namespace {
std::vector<double> leafs(const Weight& w) { return {w.values().values().begin(), w.values().values().end()}; }
}  // namespace

TEST_SUITE("specnorm") {
  TEST_CASE("dense and power routes agree with a Jacobi SVD oracle") {
    Rng rng(21);
    const DyadicGrid grid(6);
    const auto spec = ops::HaarShiftSpec::random(grid, 2, rng);
    const Weight w = cascade_weight(grid, 0.5, 3);
    const double want = oracle::weighted_norm_dense(oracle::shift_matrix(spec), leafs(w));
    const NormEstimate dense = operator_norm_weighted(ops::as_map(spec), w);
    CHECK(dense.method == NormMethod::dense);
    CHECK(dense.value == doctest::Approx(want).epsilon(1e-10));
    NormOptions opts;
    opts.force_power = true;
    opts.tol = 1e-12;
    opts.max_iterations = 20000;
    const NormEstimate power = operator_norm_weighted(ops::as_map(spec), w, opts);
    CHECK(power.method == NormMethod::power);
    CHECK(power.converged);
    CHECK(power.value <= want * (1.0 + 1e-9));
    CHECK(power.value == doctest::Approx(want).epsilon(1e-3));
  }

  TEST_CASE("averaging operator norm is <w>^1/2 <1/w>^1/2") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const DyadicGrid grid(seed % 2 == 0 ? 6 : 9);
      const Weight w = cascade_weight(grid, 0.6, seed);
      const double want = std::sqrt(average(w.values(), DyadicNode::root()) * average(w.reciprocal(), DyadicNode::root()));
      CHECK(operator_norm_weighted(ops::root_average_map(grid), w).value == doctest::Approx(want).epsilon(1e-6));
    }
  }

  TEST_CASE("non-convergence is reported, not thrown") {
    Rng rng(22);
    const DyadicGrid grid(9);
    const auto spec = ops::HaarShiftSpec::random(grid, 1, rng);
    NormOptions opts;
    opts.max_iterations = 2;
    opts.tol = 1e-15;
    const NormEstimate est = operator_norm_weighted(ops::as_map(spec), gen_random_a2(grid, 4.0, 1), opts);
    CHECK_FALSE(est.converged);
    CHECK(est.iterations == 2);
  }

  TEST_CASE("multiplier bilinear form equals four times a signed multiplier pairing") {
    Rng rng(23);
    const DyadicGrid grid(7);
    const StepFunction f = oracle::random_function(grid, rng), g = oracle::random_function(grid, rng);
    const auto ef = haar_expand(f), eg = haar_expand(g);
    std::vector<double> sigma(grid.leaf_count(), 0.0);
    for (std::size_t h = 1; h < sigma.size(); ++h) sigma[h] = ef.detail[h] * eg.detail[h] >= 0.0 ? 1.0 : -1.0;
    const ops::MultiplierSpec spec(grid, sigma);
    const double pairing = inner(ops::apply_multiplier(spec, f), g) - ef.root_average * eg.root_average;
    const Weight w = cascade_weight(grid, 0.4, 7);
    const BilinearCheck check = multiplier_bilinear_check(w, f, g);
    CHECK(check.lhs == doctest::Approx(4.0 * pairing).epsilon(1e-10));
    CHECK(check.rhs > 0.0);
  }

  TEST_CASE("paraproduct bilinear check rejects a constant symbol") {
    const DyadicGrid grid(4);
    const StepFunction f = StepFunction::constant(grid, 1.0);
    CHECK_THROWS(paraproduct_bilinear_check(Weight::constant(grid), f, f, f));
  }

  TEST_CASE("complexity scan layout and determinism") {
    const DyadicGrid grid(5);
    const ScanReport a = complexity_scan(grid, {1, 2}, {1.0, 4.0}, 3, 99, {}, 1);
    const ScanReport b = complexity_scan(grid, {1, 2}, {1.0, 4.0}, 3, 99, {}, 2);
    REQUIRE(a.rows.size() == 12);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].n == (i < 6 ? 1 : 2));
      CHECK(a.rows[i].trial == static_cast<int>(i % 3));
      CHECK(a.rows[i].norm.value == b.rows[i].norm.value);
    }
    CHECK(a.fitted_C == b.fitted_C);
    double best = 0.0;
    for (const auto& r : a.rows) best = std::max(best, r.norm.value / (r.n * r.a2));
    CHECK(a.fitted_C == doctest::Approx(best));
    CHECK(a.all_converged());
  }

  TEST_CASE("log-log slope") {
    CHECK(loglog_slope({1.0, 2.0, 4.0, 8.0}, {3.0, 6.0, 12.0, 24.0}) == doctest::Approx(1.0));
    CHECK(loglog_slope({1.0, 10.0, 100.0}, {2.0, 2.0 * std::sqrt(10.0), 20.0}) == doctest::Approx(0.5));
  }
}
