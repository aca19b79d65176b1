#include "haarlab/weights.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "haarlab/error.hpp"
#include "haarlab/random.hpp"

namespace haarlab {

namespace {

StepFunction reciprocal_of(const StepFunction& w) {
  std::vector<double> inv(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (!(w[j] > 0.0) || !std::isfinite(w[j])) {
      throw ValidationError("weight must be strictly positive and finite; leaf " + std::to_string(j) +
                            " has value " + std::to_string(w[j]));
    }
    inv[j] = 1.0 / w[j];
  }
  return StepFunction(w.grid(), std::move(inv));
}

}  // namespace

Weight::Weight(StepFunction w) : w_(std::move(w)), w_inv_(reciprocal_of(w_)) {}

Weight Weight::constant(DyadicGrid grid, double c) { return Weight(StepFunction::constant(grid, c)); }

Weight Weight::inverse() const { return Weight(w_inv_); }

Weight Weight::scaled(double c) const { return Weight(w_ * c); }

A2Report a2_norm(const Weight& w) {
  const auto avg_w = all_averages(w.values());
  const auto avg_inv = all_averages(w.reciprocal());
  A2Report best{avg_w[1] * avg_inv[1], DyadicNode::root()};
  std::size_t best_h = 1;
  for (std::size_t h = 2; h < avg_w.size(); ++h) {
    const double p = avg_w[h] * avg_inv[h];
    if (p > best.a2_norm) {
      best.a2_norm = p;
      best_h = h;
    }
  }
  best.witness = DyadicNode::from_heap_index(best_h);
  return best;
}

Weight gen_power_weight(const DyadicGrid& grid, double alpha) {
  if (!(std::abs(alpha) < 1.0)) {
    throw ValidationError("power weight exponent must satisfy |alpha| < 1, got " + std::to_string(alpha));
  }
  const std::size_t n = grid.leaf_count();
  const double h = grid.leaf_measure();
  const double p = alpha + 1.0;
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = static_cast<double>(j) * h;
    const double b = a + h;
    // (b^p - a^p) / (p h); the leftmost cell is computed directly so the
    // singular endpoint does not cost precision.
    v[j] = j == 0 ? std::pow(b, alpha) / p : (std::pow(b, p) - std::pow(a, p)) / (p * h);
  }
  return Weight(StepFunction(grid, std::move(v)));
}

Weight cascade_weight(const DyadicGrid& grid, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ValidationError("cascade delta must be >= 0");
  Rng rng(seed);
  std::vector<double> log_w(grid.node_slots(), 0.0);
  for (std::size_t h = 2; h < log_w.size(); ++h) log_w[h] = log_w[h / 2] + delta * rng.sign();
  std::vector<double> v(grid.leaf_count());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::exp(log_w[grid.leaf_count() + j]);
  return Weight(StepFunction(grid, std::move(v)));
}

Weight gen_random_a2(const DyadicGrid& grid, double target, std::uint64_t seed) {
  if (!(target >= 1.0)) throw ValidationError("target A2 characteristic must be >= 1");
  if (target == 1.0) return Weight::constant(grid);

  auto realized = [&](double delta) { return a2_norm(cascade_weight(grid, delta, seed)).a2_norm; };
  const double lo_ok = 0.5 * target;
  const double hi_ok = 2.0 * target;

  double lo = 0.0;
  double hi = 0.25;
  double last = 1.0;
  int steps = 0;
  // Grow the bracket until it reaches the target.
  while ((last = realized(hi)) < target) {
    lo = hi;
    hi *= 2.0;
    if (++steps >= 60) break;
  }
  // Bisect on log [w] towards the target; accept once within 5%.
  double best_delta = hi;
  double best_err = std::abs(std::log(last / target));
  while (steps < 60) {
    const double mid = 0.5 * (lo + hi);
    const double a2 = realized(mid);
    const double err = std::abs(std::log(a2 / target));
    if (err < best_err) {
      best_err = err;
      best_delta = mid;
    }
    if (err <= std::log(1.05)) break;
    (a2 < target ? lo : hi) = mid;
    ++steps;
  }
  Weight w = cascade_weight(grid, best_delta, seed);
  const double a2 = a2_norm(w).a2_norm;
  if (a2 < lo_ok || a2 > hi_ok) {
    throw ConvergenceError("A2 calibration failed: target " + std::to_string(target) + ", last realized " +
                           std::to_string(a2) + " at delta " + std::to_string(best_delta));
  }
  return w;
}

double weighted_norm(const StepFunction& f, const Weight& w) {
  require_same_grid(f, w.values());
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += f[j] * f[j] * w[j];
  return std::sqrt(s * f.grid().leaf_measure());
}

}  // namespace haarlab
