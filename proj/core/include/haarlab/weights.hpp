#pragma once

#include <cstdint>

#include "haarlab/dyadic.hpp"

namespace haarlab {

/// Strictly positive step function together with its leafwise reciprocal.
class Weight {
 public:
  /// Throws ValidationError naming the first nonpositive leaf.
  explicit Weight(StepFunction w);

  static Weight constant(DyadicGrid grid, double c = 1.0);

  const DyadicGrid& grid() const noexcept { return w_.grid(); }
  const StepFunction& values() const noexcept { return w_; }
  const StepFunction& reciprocal() const noexcept { return w_inv_; }
  double operator[](std::size_t j) const { return w_[j]; }

  /// w^{-1} as a weight in its own right.
  Weight inverse() const;
  Weight scaled(double c) const;

 private:
  StepFunction w_;
  StepFunction w_inv_;
};

/// Dyadic Muckenhoupt characteristic and a node attaining it.
struct A2Report {
  double a2_norm = 1.0;
  DyadicNode witness = DyadicNode::root();
};

/// sup over every node I of the grid (leaves included) of <w>_I <w^{-1}>_I.
/// Ties go to the node with the smallest heap index.
A2Report a2_norm(const Weight& w);

/// Leaf values are the exact cell averages of x^alpha. Requires |alpha| < 1.
Weight gen_power_weight(const DyadicGrid& grid, double alpha);

/// Multiplicative cascade: log w on a leaf is the sum of independent +-delta
/// increments along the edges from the root. Pure function of (grid, delta, seed).
Weight cascade_weight(const DyadicGrid& grid, double delta, std::uint64_t seed);

/// Cascade weight with delta calibrated by bisection so that the realized
/// [w] lies in [target/2, 2 target]. target = 1 gives w = 1. Throws
/// ConvergenceError when 60 bisection steps do not land in the window.
Weight gen_random_a2(const DyadicGrid& grid, double target_a2, std::uint64_t seed);

/// ||f||_{L^2(w)} = (sum_j f_j^2 w_j |leaf|)^{1/2}.
double weighted_norm(const StepFunction& f, const Weight& w);

}  // namespace haarlab
