#include <cmath>

#include "doctest.h"
#include "haarlab/bellman.hpp"
#include "haarlab/error.hpp"
#include "haarlab/random.hpp"

using namespace haarlab;

namespace {

// Unreduced brute force over every grid split; same parametrization as the
// DP but no symmetry pruning and no separation trick at k = 1.
double brute_dp(const BellmanPoint& x, double A, int k, int m) {
  if (k == 0) return 0.0;
  std::vector<double> open, closed, unit;
  for (int i = -m; i <= m; ++i) {
    closed.push_back(static_cast<double>(i) / m);
    if (i != -m && i != m) open.push_back(static_cast<double>(i) / m);
  }
  for (int i = 0; i <= m; ++i) unit.push_back(static_cast<double>(i) / m);
  auto range = [](double mean, double cap1, double cap2, double& lo, double& hi) {
    const double r1 = std::sqrt(std::max(cap1, 0.0)), r2 = std::sqrt(std::max(cap2, 0.0));
    lo = std::max(-r1, 2.0 * mean - r2);
    hi = std::min(r1, 2.0 * mean + r2);
    if (lo > hi && lo - hi < 1e-12 * std::max(1.0, r1 + r2 + std::abs(mean))) lo = hi = 0.5 * (lo + hi);
    return lo <= hi;
  };
  auto uv_ok = [A](double uv) { return uv >= 1.0 - 1e-12 && uv <= A * (1.0 + 1e-12); };
  double best = 0.0;
  for (double a : open)
    for (double b : open) {
      const double u1 = x.u * (1 + a), u2 = x.u * (1 - a), v1 = x.v * (1 + b), v2 = x.v * (1 - b);
      if (!uv_ok(u1 * v1) || !uv_ok(u2 * v2)) continue;
      for (double c : closed)
        for (double e : closed) {
          const double F1 = x.F * (1 + c), F2 = 2 * x.F - F1, G1 = x.G * (1 + e), G2 = 2 * x.G - G1;
          double flo, fhi, glo, ghi;
          if (!range(x.f, F1 * v1, F2 * v2, flo, fhi) || !range(x.g, G1 * u1, G2 * u2, glo, ghi)) continue;
          for (double s : unit)
            for (double t : unit) {
              const double f1 = flo + s * (fhi - flo), g1 = glo + t * (ghi - glo);
              const BellmanPoint x1{f1, g1, F1, G1, u1, v1};
              const BellmanPoint x2{2 * x.f - f1, 2 * x.g - g1, F2, G2, u2, v2};
              const double gain = std::abs(x1.f - x2.f) * std::abs(x1.g - x2.g);
              best = std::max(best, gain + 0.5 * (brute_dp(x1, A, k - 1, m) + brute_dp(x2, A, k - 1, m)));
            }
        }
    }
  return best;
}

BellmanPoint random_point(Rng& rng, double A) {
  BellmanPoint x;
  x.u = std::exp(rng.uniform(-1.0, 1.0));
  x.v = rng.uniform(1.0, A) / x.u;
  x.F = std::exp(rng.uniform(-1.0, 1.0));
  x.G = std::exp(rng.uniform(-1.0, 1.0));
  x.f = rng.uniform(-1.0, 1.0) * std::sqrt(x.F * x.v);
  x.g = rng.uniform(-1.0, 1.0) * std::sqrt(x.G * x.u);
  return x;
}

}  // namespace

TEST_SUITE("bellman") {
  TEST_CASE("domain membership") {
    CHECK(in_domain(BellmanPoint{0, 0, 1, 1, 1, 1}, 1.0));
    CHECK_FALSE(in_domain(BellmanPoint{0, 0, 1, 1, 0.5, 1}, 4.0));
    CHECK_FALSE(in_domain(BellmanPoint{0, 0, 1, 1, 4, 2}, 4.0));
    CHECK_FALSE(in_domain(BellmanPoint{2, 0, 1, 1, 1, 2}, 4.0));
    CHECK(in_domain(BellmanPoint{std::sqrt(2.0), 0, 1, 1, 1, 2}, 4.0));
    CHECK_FALSE(in_domain(BellmanPointPara{BellmanPoint{}, 1.5}, 4.0));
  }

  TEST_CASE("closed-form segment maximum matches sampling and stays below 9A/8") {
    Rng rng(51);
    const double A = 4.0;
    for (int i = 0; i < 2000; ++i) {
      const BellmanPoint a = random_point(rng, A), b = random_point(rng, A);
      const BellmanPoint m = midpoint(a, b);
      if (m.u * m.v > A) continue;
      const SegmentMax s = segment_max_uv(a, b, A);
      CHECK(s.value <= 9.0 * A / 8.0 + 1e-9);
      CHECK(s.value >= segment_max_uv_sampled(a, b, 4000) - 1e-12);
      CHECK(s.value == doctest::Approx(segment_max_uv_sampled(a, b, 4000)).epsilon(1e-6));
    }
  }

  TEST_CASE("extremal segment reaches 9A/8 at t = 3/4") {
    for (double A : {1.0, 4.0, 16.0}) {
      const auto [xm, xp] = extremal_segment(A);
      CHECK(xm.u * xm.v == 0.0);
      CHECK(xp.u * xp.v == doctest::Approx(A));
      CHECK(midpoint(xm, xp).u * midpoint(xm, xp).v == doctest::Approx(A));
      const SegmentMax s = segment_max_uv(xm, xp, A);
      CHECK(s.value == doctest::Approx(9.0 * A / 8.0).epsilon(1e-12));
      CHECK(s.t == doctest::Approx(0.75));
    }
  }

  TEST_CASE("segment precondition names the failing point") {
    const BellmanPoint ok{0, 0, 1, 1, 1, 1}, bad{0, 0, 1, 1, 3, 3};
    try {
      segment_max_uv(ok, bad, 4.0);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("X_plus") != std::string::npos);
    }
  }

  TEST_CASE("quadratic candidate deficit is scale/4 times the squared jumps") {
    Rng rng(52);
    const BellmanCandidate c = candidate_quadratic(3.0);
    CHECK(c.gamma == 1.5);
    for (int i = 0; i < 100; ++i) {
      const BellmanPoint a = random_point(rng, 8.0), b = random_point(rng, 8.0);
      const double df = a.f - b.f, dg = a.g - b.g;
      const double deficit = midpoint_deficit(c, a, b, 8.0);
      CHECK(deficit == doctest::Approx(0.75 * (df * df + dg * dg)).epsilon(1e-10));
      CHECK(deficit >= c.gamma * std::abs(df) * std::abs(dg) - 1e-12);
    }
  }

  TEST_CASE("para quadratic gain on 0 <= M <= 1") {
    Rng rng(53);
    const BellmanCandidate c = candidate_para_quadratic(2.0);
    REQUIRE(c.is_para());
    for (int i = 0; i < 200; ++i) {
      const BellmanPoint a = random_point(rng, 4.0), b = random_point(rng, 4.0);
      const double M1 = rng.uniform(), M2 = rng.uniform();
      const double mean = 0.5 * (M1 + M2);
      const double M = mean + (1.0 - mean) * rng.uniform();
      const BellmanPoint x = midpoint(a, b);
      const double deficit = c.para_value(x, M, 4.0) - 0.5 * (c.para_value(a, M1, 4.0) + c.para_value(b, M2, 4.0));
      CHECK(deficit >= c.gamma * (M - mean) * std::abs(x.f) * std::abs(a.g - b.g) - 1e-12);
    }
  }

  TEST_CASE("dp at the trivial point") {
    const BellmanPoint x{0, 0, 1, 1, 1, 1};
    CHECK(dp_bellman(x, 4.0, 0) == 0.0);
    CHECK(dp_bellman(x, 4.0, 1) == doctest::Approx(4.0));
    CHECK(dp_bellman(x, 4.0, 2) == doctest::Approx(4.0));
  }

  TEST_CASE("dp matches an unpruned brute force") {
    Rng rng(54);
    for (int i = 0; i < 6; ++i) {
      const BellmanPoint x = random_point(rng, 4.0);
      CHECK(dp_bellman(x, 4.0, 1, GridSpec{0.25}) == doctest::Approx(brute_dp(x, 4.0, 1, 4)).epsilon(1e-12));
      CHECK(dp_bellman(x, 4.0, 2, GridSpec{0.5}) == doctest::Approx(brute_dp(x, 4.0, 2, 2)).epsilon(1e-12));
    }
  }

  TEST_CASE("dp is nondecreasing in depth") {
    Rng rng(55);
    for (int i = 0; i < 10; ++i) {
      const BellmanPoint x = random_point(rng, 4.0);
      const double b1 = dp_bellman(x, 4.0, 1, GridSpec{0.5});
      const double b2 = dp_bellman(x, 4.0, 2, GridSpec{0.5});
      CHECK(b1 >= 0.0);
      CHECK(b2 >= b1);
    }
  }

  TEST_CASE("dp argument checks") {
    CHECK_THROWS_AS(dp_bellman(BellmanPoint{0, 0, 1, 1, 1, 1}, 4.0, 4), ValidationError);
    CHECK_THROWS_AS(dp_bellman(BellmanPoint{0, 0, 1, 1, 0.1, 1}, 4.0, 1), ValidationError);
    CHECK_THROWS_AS(dp_bellman(BellmanPoint{0, 0, 1, 1, 1, 1}, 4.0, 1, GridSpec{0.3}), ValidationError);
  }

  TEST_CASE("candidate parsing") {
    CHECK(parse_candidate("quadratic").gamma == 1.0);
    CHECK(parse_candidate("quadratic:scale=4").gamma == 2.0);
    CHECK(parse_candidate("para-quadratic:scale=2").is_para());
    CHECK(parse_candidate("dp:k=1,res=0.5").name == "dp:k=1,res=0.5");
    CHECK_THROWS_AS(parse_candidate("cubic"), ValidationError);
    CHECK_THROWS_AS(parse_candidate("quadratic:scale=x"), ValidationError);
    CHECK_THROWS_AS(parse_candidate("quadratic:shape=2"), ValidationError);
    CHECK_THROWS_AS(parse_candidate("dp:k=1.5"), ValidationError);
    CHECK_THROWS_AS(parse_candidate("dp:res=0.3"), ValidationError);
  }

  TEST_CASE("gain split of a form dominating 2|xy|") {
    Eigen::MatrixXd m(3, 3);
    m << 2, 0, 1, 0, 1, 0, 1, 0, 1;
    const GainSplit s = quadratic_gain_split(QuadraticForm({"x", "y", "z"}, m, 0, 1));
    CHECK(s.alpha > 0.0);
    CHECK(s.min_eigenvalue >= -1e-12);
    Eigen::MatrixXd r = m;
    r(0, 0) -= s.alpha;
    r(1, 1) -= 1.0 / s.alpha;
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(r).eigenvalues().minCoeff() >= -1e-10);
  }

  TEST_CASE("gain split failure carries a witness") {
    Eigen::MatrixXd m(2, 2);
    m << 1, 0, 0, 0.5;
    const QuadraticForm q({"x", "y"}, m, 0, 1);
    try {
      quadratic_gain_split(q);
      FAIL("expected WitnessError");
    } catch (const WitnessError& e) {
      const auto& w = e.witness();
      REQUIRE(w.size() == 2);
      const Eigen::Vector2d z(w[0], w[1]);
      CHECK(q(z) < 2.0 * std::abs(z[0] * z[1]));
    }
    Eigen::MatrixXd asym(2, 2);
    asym << 1, 0.5, 0.25, 1;
    CHECK_THROWS_AS(QuadraticForm({"x", "y"}, asym, 0, 1), ValidationError);
  }
}
