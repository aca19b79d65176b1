#pragma once

// Weighted operator norms and the scans behind the linear-in-complexity,
// linear-in-[w] norm law.

#include <cstdint>
#include <string>
#include <vector>

#include "haarlab/operators.hpp"
#include "haarlab/weights.hpp"

namespace haarlab {

enum class NormMethod { power, dense };

std::string to_string(NormMethod m);

struct NormOptions {
  double tol = 1e-8;          ///< relative Rayleigh-quotient increment
  int max_iterations = 5000;
  std::size_t dense_limit = 256;  ///< use the SVD when 2^N <= this
  bool force_power = false;
  std::uint64_t seed = 0x9a1b2c3dULL;  ///< power-iteration start vector
};

struct NormEstimate {
  double value = 0.0;
  double residual = 0.0;
  int iterations = 0;
  NormMethod method = NormMethod::dense;
  bool converged = true;
};

/// Norm of T as a map L^2(w) -> L^2(w): the spectral norm of
/// g -> w^{1/2} T(w^{-1/2} g) on unweighted L^2. Non-convergence of the
/// power iteration is reported through `converged`, not thrown.
NormEstimate operator_norm_weighted(const ops::LinearMap& map, const Weight& w, const NormOptions& opts = {});
NormEstimate operator_norm(const ops::LinearMap& map, const NormOptions& opts = {});

struct BilinearCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio() const { return rhs > 0.0 ? lhs / rhs : 0.0; }
};

/// lhs = sum_I |<f>_{I_1} - <f>_{I_2}| |<g>_{I_1} - <g>_{I_2}| |I|,
/// rhs = [w] ||f||_{L^2(w)} ||g||_{L^2(w^{-1})}.
BilinearCheck multiplier_bilinear_check(const Weight& w, const StepFunction& f, const StepFunction& g);

/// lhs = sum_I |<f>_I| ||Delta_I phi||_2 |<g>_{I_1} - <g>_{I_2}| |I|^{1/2},
/// rhs = [w] ||phi||_BMO ||f||_{L^2(w)} ||g||_{L^2(w^{-1})}.
/// Throws ValidationError when phi has zero BMO norm.
BilinearCheck paraproduct_bilinear_check(const Weight& w, const StepFunction& phi, const StepFunction& f,
                                         const StepFunction& g);

struct ScanRow {
  int n = 1;
  double a2_target = 1.0;
  double a2 = 1.0;  ///< realized [w]
  int trial = 0;
  NormEstimate norm;
};

struct ScanReport {
  std::vector<ScanRow> rows;
  /// Largest per-complexity log-log slope of the trial-maximal norm against [w].
  double fitted_slope = 0.0;
  /// max over rows of norm / (n [w]).
  double fitted_C = 0.0;
  std::vector<int> complexities;
  std::vector<double> per_n_C;  ///< max norm / (n [w]) restricted to each n
  std::vector<double> per_n_slope;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> weight_seeds;

  bool all_converged() const;
};

/// For every (n, target, trial) draws a random tight HaarShiftSpec of
/// complexity n and estimates its norm in L^2(w_target). Weights come from
/// gen_random_a2 with seeds derived from `seed`. Rows are ordered by n, then
/// target, then trial, independently of the thread count.
ScanReport complexity_scan(const DyadicGrid& grid, const std::vector<int>& complexities,
                           const std::vector<double>& a2_targets, int trials, std::uint64_t seed,
                           const NormOptions& opts = {}, std::size_t threads = 0);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace haarlab
