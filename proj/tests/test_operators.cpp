#include <cmath>

#include "doctest.h"
#include "haarlab/error.hpp"
#include "haarlab/operators.hpp"
#include "oracles.hpp"

using namespace haarlab;
using namespace haarlab::ops;

namespace {
double max_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }
}  // namespace

TEST_SUITE("operators") {
  TEST_CASE("general shift agrees with the dense projection formula") {
    Rng rng(11);
    const DyadicGrid grid(5);
    for (int n = 1; n <= 3; ++n) {
      const HaarShiftSpec spec = HaarShiftSpec::random(grid, n, rng);
      const Eigen::MatrixXd T = oracle::shift_matrix(spec);
      const Eigen::MatrixXd M = oracle::matrix_of(as_map(spec));
      CHECK(max_diff(T, M) <= 1e-11 * (1.0 + T.cwiseAbs().maxCoeff()));
      CHECK(max_diff(oracle::matrix_of(as_map(transpose(spec))), T.transpose()) <= 1e-11 * (1.0 + T.norm()));
      const LinearMap map = as_map(spec);
      Eigen::MatrixXd Mt(M.rows(), M.cols());
      for (Eigen::Index j = 0; j < M.cols(); ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(M.rows());
        e[j] = 1.0;
        Mt.col(j) = oracle::vec(map.apply_transpose(oracle::func(grid, e)));
      }
      CHECK(max_diff(Mt, M.transpose()) <= 1e-11 * (1.0 + M.norm()));
    }
  }

  TEST_CASE("kernels above |Q|^-1 are rejected") {
    const DyadicGrid grid(4);
    const DyadicNode q(1, 0);
    CHECK_THROWS_AS(HaarShiftSpec(grid, 1, {{q, {2.0, 2.0, 2.0, 2.1}}}), ValidationError);
    CHECK_NOTHROW(HaarShiftSpec(grid, 1, {{q, {2.0, -2.0, 2.0, 2.0}}}));
    CHECK_THROWS_AS(HaarShiftSpec(grid, 1, {{q, {1.0, 1.0, 1.0, 1.0}}, {q, {1.0, 1.0, 1.0, 1.0}}}), ValidationError);
    CHECK_THROWS_AS(HaarShiftSpec(grid, 2, {{DyadicNode(3, 0), std::vector<double>(16, 0.0)}}), ValidationError);
  }

  TEST_CASE("slices sum to the shift") {
    Rng rng(12);
    const DyadicGrid grid(6);
    const HaarShiftSpec spec = HaarShiftSpec::random(grid, 3, rng);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(64, 64);
    for (int k = 0; k < 3; ++k) {
      const HaarShiftSpec s = slice(spec, k);
      for (int level : s.active_levels()) CHECK((level + k) % 3 == 0);
      sum += oracle::matrix_of(as_map(s));
    }
    CHECK(max_diff(sum, oracle::matrix_of(as_map(spec))) <= 1e-11);
    CHECK_THROWS_AS(slice(spec, 3), ValidationError);
  }

  TEST_CASE("local bilinear pieces") {
    Rng rng(13);
    const DyadicGrid grid(6);
    const HaarShiftSpec spec = HaarShiftSpec::random(grid, 2, rng);
    const StepFunction f = oracle::random_function(grid, rng);
    const StepFunction g = oracle::random_function(grid, rng);
    double total = 0.0;
    for (const auto& piece : local_bilinear(spec, f, g)) {
      CHECK(std::abs(piece.value) <= piece.bound * (1.0 + 1e-12));
      total += piece.value;
    }
    CHECK(total == doctest::Approx(inner(apply_haar_shift(spec, f), g)).epsilon(1e-10));
  }

  TEST_CASE("elementary shifts") {
    Rng rng(14);
    const DyadicGrid grid(5);
    for (auto [m, n] : {std::pair{0, 0}, std::pair{0, 2}, std::pair{1, 1}, std::pair{2, 1}}) {
      const ElementaryShiftSpec spec = ElementaryShiftSpec::random(grid, m, n, rng);
      CHECK(spec.complexity() == std::max(m, n) + 1);
      // Direct formula: sum |Q|^{-1} (f, source) target.
      const auto N = static_cast<Eigen::Index>(grid.leaf_count());
      Eigen::MatrixXd D = Eigen::MatrixXd::Zero(N, N);
      for (const auto& e : spec.entries()) {
        for (const auto& p : e.pairs) {
          const Eigen::VectorXd s = oracle::vec(p.source.to_step_function(grid));
          const Eigen::VectorXd t = oracle::vec(p.target.to_step_function(grid));
          D += t * s.transpose() / (static_cast<double>(N) * e.q.length());
        }
      }
      const Eigen::MatrixXd M = oracle::matrix_of(as_map(spec));
      CHECK(max_diff(M, D) <= 1e-11 * (1.0 + D.norm()));
      CHECK(max_diff(oracle::matrix_of(as_map(adjoint(spec))), D.transpose()) <= 1e-11 * (1.0 + D.norm()));
      const HaarShiftSpec general = to_general(spec);
      CHECK(general.complexity() == spec.complexity());
      CHECK(max_diff(oracle::matrix_of(as_map(general)), D) <= 1e-11 * (1.0 + D.norm()));
    }
  }

  TEST_CASE("elementary normalization is enforced") {
    const DyadicGrid grid(4);
    const DyadicNode q(0, 0);
    const HaarVector big(DyadicNode(1, 0), {2.0, -2.0});
    const HaarVector unit(DyadicNode(1, 1), {1.0, -1.0});
    CHECK_THROWS_AS(ElementaryShiftSpec(grid, 1, 1, {{q, {{big, unit}}}}), ValidationError);
    CHECK_NOTHROW(ElementaryShiftSpec(grid, 1, 1, {{q, {{unit, unit}}}}));
    // A source that is not in chld_m(Q) is misplaced.
    CHECK_THROWS_AS(ElementaryShiftSpec(grid, 0, 1, {{q, {{unit, unit}}}}), ValidationError);
  }

  TEST_CASE("martingale multipliers") {
    Rng rng(15);
    const DyadicGrid grid(5);
    const StepFunction f = oracle::random_function(grid, rng);
    CHECK((apply_multiplier(MultiplierSpec::constant(grid, 1.0), f) - f).max_abs() <= 1e-12);
    const MultiplierSpec spec = MultiplierSpec::random(grid, rng);
    Eigen::MatrixXd D = Eigen::MatrixXd::Constant(32, 32, 1.0 / 32.0);
    for (std::size_t h = 1; h < 32; ++h) {
      const DyadicNode node = DyadicNode::from_heap_index(h);
      const Eigen::VectorXd v = oracle::haar_vector(grid, node.level(), node.position());
      D += spec.sigma(node) * v * v.transpose() / 32.0;
    }
    CHECK(max_diff(oracle::matrix_of(as_map(spec)), D) <= 1e-12);
    CHECK(spec.max_abs() <= 1.0);
    std::vector<double> bad(32, 0.0);
    bad[3] = 1.5;
    CHECK_THROWS_AS(MultiplierSpec(grid, bad), ValidationError);
  }

  TEST_CASE("paraproduct against dense matrix and BMO") {
    Rng rng(16);
    const DyadicGrid grid(5);
    const StepFunction phi = oracle::random_function(grid, rng);
    const ParaproductSpec spec(phi);
    const Eigen::MatrixXd P = oracle::paraproduct_matrix(phi);
    const Eigen::MatrixXd M = oracle::matrix_of(as_map(spec));
    CHECK(max_diff(M, P) <= 1e-11 * (1.0 + P.norm()));
    const StepFunction g = oracle::random_function(grid, rng);
    CHECK((oracle::vec(apply_paraproduct_transpose(spec, g)) - P.transpose() * oracle::vec(g)).cwiseAbs().maxCoeff() <=
          1e-11 * (1.0 + P.norm()));
    CHECK(bmo_norm(phi) == doctest::Approx(oracle::bmo_naive(phi)).epsilon(1e-12));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(P);
    CHECK(svd.singularValues()[0] <= 2.0 * bmo_norm(phi) + 1e-8);
  }

  TEST_CASE("weighted adjoint") {
    Rng rng(17);
    const DyadicGrid grid(4);
    const HaarShiftSpec spec = HaarShiftSpec::random(grid, 2, rng);
    std::vector<double> w(16);
    for (double& x : w) x = std::exp(rng.normal());
    const LinearMap t = as_map(spec);
    const LinearMap ta = weighted_adjoint(t, w);
    const StepFunction f = oracle::random_function(grid, rng), g = oracle::random_function(grid, rng);
    auto wip = [&](const StepFunction& a, const StepFunction& b) {
      double s = 0.0;
      for (std::size_t j = 0; j < 16; ++j) s += a[j] * b[j] * w[j];
      return s / 16.0;
    };
    CHECK(wip(t(f), g) == doctest::Approx(wip(f, ta(g))).epsilon(1e-12));
    const LinearMap e = root_average_map(grid);
    CHECK(e(f)[7] == doctest::Approx(average(f, DyadicNode::root())));
    CHECK(average(restrict_to_mean_zero(identity_map(grid))(f), DyadicNode::root()) == doctest::Approx(0.0).epsilon(1e-14));
  }
}
