#include <cmath>

#include "doctest.h"
#include "haarlab/error.hpp"
#include "haarlab/weights.hpp"
#include "oracles.hpp"

using namespace haarlab;

namespace {
std::vector<double> leafs(const Weight& w) { return {w.values().values().begin(), w.values().values().end()}; }
}  // namespace

TEST_SUITE("weights") {
  TEST_CASE("nonpositive weights are rejected with the leaf named") {
    std::vector<double> v(8, 1.0);
    v[5] = 0.0;
    try {
      Weight w(StepFunction(DyadicGrid(3), v));
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find('5') != std::string::npos);
    }
  }

  TEST_CASE("A2 norm matches the direct supremum") {
    Rng rng(8);
    for (int t = 0; t < 10; ++t) {
      const DyadicGrid grid(7);
      const Weight w = cascade_weight(grid, 0.3 + 0.1 * t, 100 + t);
      const A2Report r = a2_norm(w);
      CHECK(r.a2_norm == doctest::Approx(oracle::a2_naive(grid, leafs(w))).epsilon(1e-12));
      CHECK(r.a2_norm >= 1.0);
      CHECK(average(w.values(), r.witness) * average(w.reciprocal(), r.witness) == doctest::Approx(r.a2_norm));
    }
  }

  TEST_CASE("A2 invariances") {
    const DyadicGrid grid(6);
    const Weight w = cascade_weight(grid, 0.7, 9);
    const double a = a2_norm(w).a2_norm;
    CHECK(a2_norm(w.scaled(17.0)).a2_norm == doctest::Approx(a));
    CHECK(a2_norm(w.inverse()).a2_norm == doctest::Approx(a));
    CHECK(a2_norm(Weight::constant(grid, 3.0)).a2_norm == doctest::Approx(1.0));
  }

  TEST_CASE("power weights are exact cell averages") {
    const DyadicGrid grid(5);
    const double alpha = 0.4;
    const Weight w = gen_power_weight(grid, alpha);
    for (std::size_t j = 0; j < grid.leaf_count(); ++j) {
      const double a = static_cast<double>(j) / 32.0, b = static_cast<double>(j + 1) / 32.0;
      const double exact = (std::pow(b, alpha + 1) - std::pow(a, alpha + 1)) / ((alpha + 1) * (b - a));
      CHECK(w[j] == doctest::Approx(exact).epsilon(1e-12));
    }
    // [w] increases with alpha.
    double prev = 0.0;
    for (double al : {0.0, 0.2, 0.4, 0.6, 0.8}) {
      const double a = a2_norm(gen_power_weight(DyadicGrid(10), al)).a2_norm;
      CHECK(a >= prev);
      prev = a;
    }
    CHECK_THROWS_AS(gen_power_weight(grid, 1.0), ValidationError);
  }

  TEST_CASE("cascade weights are deterministic") {
    const DyadicGrid grid(6);
    CHECK(leafs(cascade_weight(grid, 0.5, 42)) == leafs(cascade_weight(grid, 0.5, 42)));
    CHECK(leafs(cascade_weight(grid, 0.5, 42)) != leafs(cascade_weight(grid, 0.5, 43)));
  }

  TEST_CASE("random A2 weights land in the target window") {
    const DyadicGrid grid(8);
    for (double target : {1.0, 2.0, 4.0, 16.0}) {
      const double a = a2_norm(gen_random_a2(grid, target, 5)).a2_norm;
      CHECK(a >= target / 2.0);
      CHECK(a <= 2.0 * target);
    }
    CHECK(a2_norm(gen_random_a2(grid, 1.0, 5)).a2_norm == doctest::Approx(1.0));
  }

  TEST_CASE("weighted norm") {
    const DyadicGrid grid(2);
    const Weight w(StepFunction(grid, {1.0, 2.0, 3.0, 4.0}));
    const StepFunction f(grid, {1.0, 1.0, -1.0, 2.0});
    CHECK(weighted_norm(f, w) == doctest::Approx(std::sqrt((1.0 + 2.0 + 3.0 + 16.0) / 4.0)));
  }
}
