#include "haarlab/specnorm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "haarlab/error.hpp"
#include "haarlab/parallel.hpp"
#include "haarlab/random.hpp"

namespace haarlab {

std::string to_string(NormMethod m) { return m == NormMethod::dense ? "dense" : "power"; }

namespace {

struct Conjugated {
  const ops::LinearMap& map;
  std::vector<double> root_w;
  DyadicGrid grid;

  // C g = w^{1/2} T(w^{-1/2} g)
  std::vector<double> forward(const std::vector<double>& g) const {
    std::vector<double> x(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) x[j] = g[j] / root_w[j];
    const StepFunction y = map.apply(StepFunction(grid, std::move(x)));
    std::vector<double> out(y.values().begin(), y.values().end());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] *= root_w[j];
    return out;
  }
  // C^t g = w^{-1/2} T^t(w^{1/2} g)
  std::vector<double> backward(const std::vector<double>& g) const {
    std::vector<double> x(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) x[j] = g[j] * root_w[j];
    const StepFunction y = map.apply_transpose(StepFunction(grid, std::move(x)));
    std::vector<double> out(y.values().begin(), y.values().end());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] /= root_w[j];
    return out;
  }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

NormEstimate dense_norm(const Conjugated& c) {
  const std::size_t n = c.grid.leaf_count();
  Eigen::MatrixXd m(n, n);
  std::vector<double> e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const auto col = c.forward(e);
    for (std::size_t i = 0; i < n; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
    e[j] = 0.0;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  NormEstimate est;
  est.value = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  est.method = NormMethod::dense;
  return est;
}

NormEstimate power_norm(const Conjugated& c, const NormOptions& opts) {
  const std::size_t n = c.grid.leaf_count();
  Rng rng(opts.seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal();
  double nx = std::sqrt(dot(x, x));
  for (double& v : x) v /= nx;

  NormEstimate est;
  est.method = NormMethod::power;
  est.converged = false;
  double lambda = 0.0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const auto y = c.forward(x);
    const double next = dot(y, y);  // Rayleigh quotient of C^t C at unit x
    auto z = c.backward(y);
    est.iterations = it;
    if (next == 0.0) {
      lambda = 0.0;
      est.residual = 0.0;
      est.converged = true;
      break;
    }
    est.residual = std::abs(next - lambda) / next;
    lambda = next;
    const double nz = std::sqrt(dot(z, z));
    if (nz == 0.0) {
      est.converged = true;
      break;
    }
    for (std::size_t j = 0; j < n; ++j) x[j] = z[j] / nz;
    if (it > 1 && est.residual <= opts.tol) {
      est.converged = true;
      break;
    }
  }
  est.value = std::sqrt(lambda);
  return est;
}

}  // namespace

NormEstimate operator_norm_weighted(const ops::LinearMap& map, const Weight& w, const NormOptions& opts) {
  if (!(opts.tol > 0.0)) throw ValidationError("norm tolerance must be positive");
  if (!(map.grid == w.grid())) throw GridError("operator and weight live on different grids");
  Conjugated c{map, std::vector<double>(w.grid().leaf_count()), map.grid};
  for (std::size_t j = 0; j < c.root_w.size(); ++j) c.root_w[j] = std::sqrt(w[j]);
  if (!opts.force_power && map.grid.leaf_count() <= opts.dense_limit) return dense_norm(c);
  return power_norm(c, opts);
}

NormEstimate operator_norm(const ops::LinearMap& map, const NormOptions& opts) {
  return operator_norm_weighted(map, Weight::constant(map.grid), opts);
}

BilinearCheck multiplier_bilinear_check(const Weight& w, const StepFunction& f, const StepFunction& g) {
  require_same_grid(f, g);
  require_same_grid(f, w.values());
  const auto af = all_averages(f);
  const auto ag = all_averages(g);
  BilinearCheck out;
  const std::size_t internal = f.grid().leaf_count();
  for (std::size_t h = 1; h < internal; ++h) {
    out.lhs += std::abs(af[2 * h] - af[2 * h + 1]) * std::abs(ag[2 * h] - ag[2 * h + 1]) *
               DyadicNode::from_heap_index(h).length();
  }
  out.rhs = a2_norm(w).a2_norm * weighted_norm(f, w) * weighted_norm(g, w.inverse());
  return out;
}

BilinearCheck paraproduct_bilinear_check(const Weight& w, const StepFunction& phi, const StepFunction& f,
                                         const StepFunction& g) {
  require_same_grid(f, g);
  require_same_grid(f, phi);
  require_same_grid(f, w.values());
  const double bmo = ops::bmo_norm(phi);
  if (!(bmo > 0.0)) throw ValidationError("paraproduct symbol has zero BMO norm");
  const auto ephi = haar_expand(phi);
  const auto af = all_averages(f);
  const auto ag = all_averages(g);
  BilinearCheck out;
  for (std::size_t h = 1; h < f.grid().leaf_count(); ++h) {
    out.lhs += std::abs(af[h]) * std::abs(ephi.detail[h]) * std::abs(ag[2 * h] - ag[2 * h + 1]) *
               std::sqrt(DyadicNode::from_heap_index(h).length());
  }
  out.rhs = a2_norm(w).a2_norm * bmo * weighted_norm(f, w) * weighted_norm(g, w.inverse());
  return out;
}

bool ScanReport::all_converged() const {
  return std::all_of(rows.begin(), rows.end(), [](const ScanRow& r) { return r.norm.converged; });
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("slope fit needs two or more points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

ScanReport complexity_scan(const DyadicGrid& grid, const std::vector<int>& complexities,
                           const std::vector<double>& a2_targets, int trials, std::uint64_t seed,
                           const NormOptions& opts, std::size_t threads) {
  if (complexities.empty() || a2_targets.empty()) throw ValidationError("scan lists must be nonempty");
  if (trials < 1) throw ValidationError("scan needs at least one trial");
  for (int n : complexities) {
    if (n < 1 || n > grid.depth()) throw ValidationError("complexity " + std::to_string(n) + " out of range");
  }
  if (threads == 0) threads = default_thread_count();

  ScanReport report;
  report.seed = seed;
  report.complexities = complexities;

  std::vector<Weight> weights;
  std::vector<double> realized;
  for (std::size_t t = 0; t < a2_targets.size(); ++t) {
    const std::uint64_t ws = derive_seed(seed, 0x77, t);
    report.weight_seeds.push_back(ws);
    weights.push_back(gen_random_a2(grid, a2_targets[t], ws));
    realized.push_back(a2_norm(weights.back()).a2_norm);
  }

  const std::size_t per_n = a2_targets.size() * static_cast<std::size_t>(trials);
  report.rows.resize(complexities.size() * per_n);
  parallel_for(
      report.rows.size(),
      [&](std::size_t idx) {
        const std::size_t ni = idx / per_n;
        const std::size_t ti = (idx % per_n) / static_cast<std::size_t>(trials);
        const int trial = static_cast<int>(idx % static_cast<std::size_t>(trials));
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(complexities[ni]), ti, static_cast<std::uint64_t>(trial)));
        const auto spec = ops::HaarShiftSpec::random(grid, complexities[ni], rng);
        NormOptions o = opts;
        o.seed = derive_seed(opts.seed, idx);
        ScanRow row;
        row.n = complexities[ni];
        row.a2_target = a2_targets[ti];
        row.a2 = realized[ti];
        row.trial = trial;
        row.norm = operator_norm_weighted(ops::as_map(spec), weights[ti], o);
        report.rows[idx] = row;
      },
      threads);

  for (std::size_t ni = 0; ni < complexities.size(); ++ni) {
    double c = 0.0;
    std::vector<double> xs, ys;
    for (std::size_t ti = 0; ti < a2_targets.size(); ++ti) {
      double best = 0.0;
      for (int trial = 0; trial < trials; ++trial) {
        const auto& r = report.rows[ni * per_n + ti * static_cast<std::size_t>(trials) + static_cast<std::size_t>(trial)];
        best = std::max(best, r.norm.value);
        c = std::max(c, r.norm.value / (r.n * r.a2));
      }
      xs.push_back(realized[ti]);
      ys.push_back(best);
    }
    report.per_n_C.push_back(c);
    report.fitted_C = std::max(report.fitted_C, c);
    bool distinct = false;
    for (double x : xs) distinct = distinct || std::abs(x - xs.front()) > 1e-12 * x;
    const bool positive = std::all_of(ys.begin(), ys.end(), [](double y) { return y > 0.0; });
    report.per_n_slope.push_back(distinct && positive ? loglog_slope(xs, ys) : 0.0);
  }
  report.fitted_slope = *std::max_element(report.per_n_slope.begin(), report.per_n_slope.end());
  return report;
}

}  // namespace haarlab
