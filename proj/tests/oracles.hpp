#pragma once

// Slow, independent reference computations. Everything here is built from
// dense matrices and direct sums over leaves; nothing calls the library's
// fast paths except to read inputs.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "haarlab/dyadic.hpp"
#include "haarlab/operators.hpp"
#include "haarlab/random.hpp"
#include "haarlab/weights.hpp"

namespace oracle {

using haarlab::DyadicGrid;
using haarlab::DyadicNode;
using haarlab::StepFunction;

inline std::vector<double> random_values(std::size_t n, haarlab::Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

inline StepFunction random_function(const DyadicGrid& grid, haarlab::Rng& rng) {
  return StepFunction(grid, random_values(grid.leaf_count(), rng));
}

inline Eigen::VectorXd vec(const StepFunction& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(f.size()));
  for (std::size_t j = 0; j < f.size(); ++j) v[static_cast<Eigen::Index>(j)] = f[j];
  return v;
}

inline StepFunction func(const DyadicGrid& grid, const Eigen::VectorXd& v) {
  return StepFunction(grid, std::vector<double>(v.data(), v.data() + v.size()));
}

/// Leaf indices [lo, hi) of an interval, computed from its endpoints.
inline std::pair<std::size_t, std::size_t> span_of(const DyadicGrid& grid, int level, std::int64_t pos) {
  const std::size_t width = std::size_t{1} << (grid.depth() - level);
  return {static_cast<std::size_t>(pos) * width, static_cast<std::size_t>(pos + 1) * width};
}

inline double mean_over(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  double s = 0.0;
  for (std::size_t j = lo; j < hi; ++j) s += v[j];
  return s / static_cast<double>(hi - lo);
}

/// L^2-normalized Haar function of (level, pos) as a leaf vector.
inline Eigen::VectorXd haar_vector(const DyadicGrid& grid, int level, std::int64_t pos) {
  const auto [lo, hi] = span_of(grid, level, pos);
  const double len = std::ldexp(1.0, -level);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.leaf_count()));
  const std::size_t mid = (lo + hi) / 2;
  for (std::size_t j = lo; j < hi; ++j) h[static_cast<Eigen::Index>(j)] = (j < mid ? 1.0 : -1.0) / std::sqrt(len);
  return h;
}

/// (f, g) with leaf measure.
inline double pairing(const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  return f.dot(g) / static_cast<double>(f.size());
}

/// Matrix of Delta^n_Q: value on x in Q is <f>_{J(x)} - <f>_Q.
inline Eigen::MatrixXd delta_n_matrix(const DyadicGrid& grid, int level, std::int64_t pos, int n) {
  const auto N = static_cast<Eigen::Index>(grid.leaf_count());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(N, N);
  const auto [lo, hi] = span_of(grid, level, pos);
  const std::size_t block = (hi - lo) >> n;
  for (std::size_t x = lo; x < hi; ++x) {
    const std::size_t b0 = lo + ((x - lo) / block) * block;
    for (std::size_t y = b0; y < b0 + block; ++y) P(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) += 1.0 / block;
    for (std::size_t y = lo; y < hi; ++y) P(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) -= 1.0 / (hi - lo);
  }
  return P;
}

/// Dense matrix of sum_Q Delta^n_Q Sha_Q Delta^n_Q where Sha_Q has kernel
/// a_Q(x, y) = kernel[block(x), block(y)] and integrates against dy.
inline Eigen::MatrixXd shift_matrix(const haarlab::ops::HaarShiftSpec& spec) {
  const DyadicGrid& grid = spec.grid();
  const auto N = static_cast<Eigen::Index>(grid.leaf_count());
  const int n = spec.complexity();
  const std::size_t blocks = std::size_t{1} << n;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(N, N);
  for (const auto& e : spec.entries()) {
    const auto [lo, hi] = span_of(grid, e.q.level(), e.q.position());
    const std::size_t block = (hi - lo) / blocks;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
    for (std::size_t x = lo; x < hi; ++x) {
      for (std::size_t y = lo; y < hi; ++y) {
        const std::size_t bx = (x - lo) / block, by = (y - lo) / block;
        K(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) =
            e.kernel[bx * blocks + by] / static_cast<double>(N);
      }
    }
    const Eigen::MatrixXd P = delta_n_matrix(grid, e.q.level(), e.q.position(), n);
    T += P * K * P;
  }
  return T;
}

/// Dense matrix of any linear map, column by column.
inline Eigen::MatrixXd matrix_of(const haarlab::ops::LinearMap& map) {
  const auto N = static_cast<Eigen::Index>(map.grid.leaf_count());
  Eigen::MatrixXd M(N, N);
  for (Eigen::Index j = 0; j < N; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
    e[j] = 1.0;
    M.col(j) = vec(map(func(map.grid, e)));
  }
  return M;
}

/// Norm of T on L^2(w) via Jacobi SVD of W^{1/2} T W^{-1/2}.
inline double weighted_norm_dense(const Eigen::MatrixXd& T, const std::vector<double>& w) {
  const auto N = T.rows();
  Eigen::VectorXd s(N), si(N);
  for (Eigen::Index j = 0; j < N; ++j) {
    s[j] = std::sqrt(w[static_cast<std::size_t>(j)]);
    si[j] = 1.0 / s[j];
  }
  const Eigen::MatrixXd C = s.asDiagonal() * T * si.asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C);
  return svd.singularValues()[0];
}

/// sup over every node of <w>_I <1/w>_I by direct sums.
inline double a2_naive(const DyadicGrid& grid, const std::vector<double>& w) {
  std::vector<double> inv(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) inv[j] = 1.0 / w[j];
  double best = 0.0;
  for (int level = 0; level <= grid.depth(); ++level) {
    for (std::int64_t pos = 0; pos < (std::int64_t{1} << level); ++pos) {
      const auto [lo, hi] = span_of(grid, level, pos);
      best = std::max(best, mean_over(w, lo, hi) * mean_over(inv, lo, hi));
    }
  }
  return best;
}

/// Dense paraproduct matrix: Pi f = sum_I <f>_I (phi, h_I) h_I.
inline Eigen::MatrixXd paraproduct_matrix(const StepFunction& phi) {
  const DyadicGrid& grid = phi.grid();
  const auto N = static_cast<Eigen::Index>(grid.leaf_count());
  const Eigen::VectorXd p = vec(phi);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
  for (int level = 0; level < grid.depth(); ++level) {
    for (std::int64_t pos = 0; pos < (std::int64_t{1} << level); ++pos) {
      const Eigen::VectorXd h = haar_vector(grid, level, pos);
      const double c = pairing(p, h);
      const auto [lo, hi] = span_of(grid, level, pos);
      Eigen::RowVectorXd avg = Eigen::RowVectorXd::Zero(N);
      for (std::size_t y = lo; y < hi; ++y) avg[static_cast<Eigen::Index>(y)] = 1.0 / static_cast<double>(hi - lo);
      M += c * h * avg;
    }
  }
  return M;
}

/// (sup_J |J|^{-1} sum_{I subset J} (phi, h_I)^2)^{1/2} by direct sums.
inline double bmo_naive(const StepFunction& phi) {
  const DyadicGrid& grid = phi.grid();
  const Eigen::VectorXd p = vec(phi);
  std::vector<double> c2(grid.node_slots(), 0.0);
  for (int level = 0; level < grid.depth(); ++level) {
    for (std::int64_t pos = 0; pos < (std::int64_t{1} << level); ++pos) {
      const double c = pairing(p, haar_vector(grid, level, pos));
      c2[(std::size_t{1} << level) + static_cast<std::size_t>(pos)] = c * c;
    }
  }
  double best = 0.0;
  for (int level = 0; level < grid.depth(); ++level) {
    for (std::int64_t pos = 0; pos < (std::int64_t{1} << level); ++pos) {
      double s = 0.0;
      for (int sub = level; sub < grid.depth(); ++sub) {
        const std::int64_t first = pos << (sub - level), count = std::int64_t{1} << (sub - level);
        for (std::int64_t q = first; q < first + count; ++q) s += c2[(std::size_t{1} << sub) + static_cast<std::size_t>(q)];
      }
      best = std::max(best, s * std::ldexp(1.0, level));
    }
  }
  return std::sqrt(best);
}

/// max over alpha of min(p.alpha, q.alpha) subject to sum alpha = 0 and
/// |alpha_i| <= 1/3, by enumerating every candidate with at most two
/// coordinates strictly inside the box.
inline double plank_bruteforce(const std::vector<double>& p, const std::vector<double>& q) {
  const std::size_t N = p.size();
  const double t = 1.0 / 3.0;
  double best = -std::numeric_limits<double>::infinity();
  auto value = [&](const std::vector<double>& a) {
    double sp = 0.0, sq = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      if (std::abs(a[i]) > t + 1e-12) return;
      sp += p[i] * a[i];
      sq += q[i] * a[i];
      sum += a[i];
    }
    if (std::abs(sum) > 1e-9) return;
    best = std::max(best, std::min(sp, sq));
  };
  std::vector<double> a(N);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i; j < N; ++j) {
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << N); ++mask) {
        double fixed = 0.0, fp = 0.0, fq = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
          a[k] = (mask >> k & 1) ? t : -t;
          if (k != i && k != j) {
            fixed += a[k];
            fp += p[k] * a[k];
            fq += q[k] * a[k];
          }
        }
        if (i == j) {
          a[i] = -fixed;
          value(a);
          continue;
        }
        // a_i + a_j = -fixed; and either p.a = q.a or one of them sits on the box.
        const double s = -fixed;
        const double di = p[i] - q[i], dj = p[j] - q[j];
        if (std::abs(di - dj) > 1e-15) {
          a[i] = (-(fp - fq) - dj * s) / (di - dj);
          a[j] = s - a[i];
          value(a);
        }
        for (double ai : {t, -t}) {
          a[i] = ai;
          a[j] = s - ai;
          value(a);
        }
      }
    }
  }
  return best;
}

}  // namespace oracle
