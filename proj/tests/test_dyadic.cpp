#include <cmath>

#include "doctest.h"
#include "haarlab/dyadic.hpp"
#include "haarlab/error.hpp"
#include "oracles.hpp"

using namespace haarlab;

TEST_SUITE("dyadic") {
  TEST_CASE("heap index round trip and family relations") {
    for (std::size_t h = 1; h < 512; ++h) {
      const DyadicNode node = DyadicNode::from_heap_index(h);
      CHECK(node.heap_index() == h);
      if (h > 1) {
        CHECK(node.parent().heap_index() == h / 2);
        CHECK(node.parent().contains(node));
      }
      CHECK(node.child(0).heap_index() == 2 * h);
      CHECK(node.child(1).heap_index() == 2 * h + 1);
      CHECK(node.ancestor(0) == DyadicNode::root());
    }
    CHECK_THROWS_AS(DyadicNode(2, 4), GridError);
    CHECK_THROWS_AS(DyadicNode::from_heap_index(0), GridError);
  }

  TEST_CASE("children and leaf ranges") {
    const DyadicGrid grid(5);
    const DyadicNode q(2, 3);
    const auto kids = children(q, 2);
    REQUIRE(kids.size() == 4);
    CHECK(kids.front() == DyadicNode(4, 12));
    CHECK(kids.back() == DyadicNode(4, 15));
    CHECK(grid.leaf_range(q) == std::pair<std::size_t, std::size_t>{24, 32});
    CHECK_THROWS_AS(grid.children(q, 4), GridError);
    CHECK(grid.leaf(7) == DyadicNode(5, 7));
    CHECK(q.length() == doctest::Approx(0.25));
    CHECK(q.left() == doctest::Approx(0.75));
  }

  TEST_CASE("averages match direct sums") {
    Rng rng(3);
    const DyadicGrid grid(6);
    const StepFunction f = oracle::random_function(grid, rng);
    const std::vector<double> v(f.values().begin(), f.values().end());
    const auto avg = all_averages(f);
    for (std::size_t h = 1; h < grid.node_slots(); ++h) {
      const DyadicNode node = DyadicNode::from_heap_index(h);
      const auto [lo, hi] = oracle::span_of(grid, node.level(), node.position());
      CHECK(avg[h] == doctest::Approx(oracle::mean_over(v, lo, hi)).epsilon(1e-13));
      CHECK(average(f, node) == doctest::Approx(avg[h]).epsilon(1e-13));
    }
  }

  TEST_CASE("Haar expansion agrees with explicit inner products") {
    Rng rng(4);
    const DyadicGrid grid(5);
    const StepFunction f = oracle::random_function(grid, rng);
    const HaarExpansion e = haar_expand(f);
    const Eigen::VectorXd fv = oracle::vec(f);
    for (std::size_t h = 1; h < grid.leaf_count(); ++h) {
      const DyadicNode node = DyadicNode::from_heap_index(h);
      const double c = oracle::pairing(fv, oracle::haar_vector(grid, node.level(), node.position()));
      CHECK(e.coefficient(node) == doctest::Approx(c).epsilon(1e-12));
    }
    CHECK(e.root_average == doctest::Approx(fv.mean()));
  }

  TEST_CASE("reconstruct inverts expand and Parseval holds") {
    Rng rng(5);
    for (int depth : {1, 3, 10}) {
      const DyadicGrid grid(depth);
      const StepFunction f = oracle::random_function(grid, rng);
      const HaarExpansion e = haar_expand(f);
      CHECK((reconstruct(e) - f).max_abs() <= 1e-12);
      double energy = e.root_average * e.root_average;
      for (std::size_t h = 1; h < grid.leaf_count(); ++h) energy += e.detail[h] * e.detail[h];
      const double norm2 = l2_norm(f) * l2_norm(f);
      CHECK(std::abs(energy - norm2) <= 1e-12 * norm2);
    }
  }

  TEST_CASE("martingale differences") {
    Rng rng(6);
    const DyadicGrid grid(6);
    const StepFunction f = oracle::random_function(grid, rng);
    const DyadicNode q(1, 1);
    // Delta^1 is Delta.
    CHECK((mart_diff_n(f, q, 1) - mart_diff(f, q)).max_abs() <= 1e-13);
    // Delta^n_Q is the sum of Delta_J over J in chld_k(Q), k < n.
    StepFunction sum = StepFunction::zero(grid);
    for (int k = 0; k < 3; ++k) {
      for (const auto& j : children(q, k)) sum = sum + mart_diff(f, j);
    }
    CHECK((mart_diff_n(f, q, 3) - sum).max_abs() <= 1e-12);
    // It matches the dense projection and is idempotent.
    const Eigen::MatrixXd P = oracle::delta_n_matrix(grid, 1, 1, 3);
    CHECK((oracle::vec(mart_diff_n(f, q, 3)) - P * oracle::vec(f)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((P * P - P).cwiseAbs().maxCoeff() <= 1e-12);
    const auto blocks = mart_diff_n_blocks(grid, all_averages(f), q, 3);
    const auto full = mart_diff_n(f, q, 3);
    const auto [lo, hi] = grid.leaf_range(q);
    for (std::size_t b = 0; b < 8; ++b) CHECK(blocks[b] == doctest::Approx(full[lo + b * (hi - lo) / 8]));
    CHECK_THROWS_AS(mart_diff(f, grid.leaf(0)), GridError);
  }

  TEST_CASE("Haar vectors") {
    const DyadicGrid grid(4);
    const DyadicNode q(1, 0);
    CHECK_THROWS_AS(HaarVector(q, {1.0, 0.5}), ValidationError);
    const HaarVector h(q, {2.0, -2.0}, true);
    CHECK(h.sup_norm() == doctest::Approx(1.0));
    const StepFunction f = StepFunction::indicator(grid, DyadicNode(2, 0));
    CHECK(h.pair(f) == doctest::Approx(0.25));
    CHECK(HaarVector::l2_normalized(q).pair(HaarVector::l2_normalized(q).to_step_function(grid)) ==
          doctest::Approx(1.0));
    const auto avg = all_averages(f);
    CHECK(h.pair_with_averages(avg) == doctest::Approx(h.pair(f)));
  }

  TEST_CASE("push_down sums ancestors") {
    const DyadicGrid grid(3);
    std::vector<double> inc(grid.node_slots(), 0.0);
    inc[1] = 1.0;
    inc[3] = 10.0;
    inc[13] = 100.0;
    const StepFunction f = push_down(grid, inc);
    CHECK(f[0] == 1.0);
    CHECK(f[4] == 11.0);
    CHECK(f[5] == 111.0);
    CHECK(f[6] == 11.0);
  }

  TEST_CASE("grid mismatch is rejected") {
    CHECK_THROWS_AS(StepFunction::zero(DyadicGrid(3)) + StepFunction::zero(DyadicGrid(4)), GridError);
    CHECK_THROWS_AS(StepFunction(DyadicGrid(3), std::vector<double>(7)), GridError);
  }
}
