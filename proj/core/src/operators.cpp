#include "haarlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "haarlab/error.hpp"

namespace haarlab::ops {

namespace {

std::string node_name(const DyadicNode& q) {
  return "[" + std::to_string(q.level()) + "," + std::to_string(q.position()) + "]";
}

StepFunction pointwise(const StepFunction& f, const std::vector<double>& w, bool divide) {
  std::vector<double> v(f.values().begin(), f.values().end());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = divide ? v[j] / w[j] : v[j] * w[j];
  return StepFunction(f.grid(), std::move(v));
}

}  // namespace

LinearMap identity_map(const DyadicGrid& grid) {
  auto id = [](const StepFunction& f) { return f; };
  return {grid, id, id, "identity"};
}

LinearMap root_average_map(const DyadicGrid& grid) {
  auto e = [grid](const StepFunction& f) {
    require_same_grid(f, StepFunction::zero(grid));
    return StepFunction::constant(grid, average(f, DyadicNode::root()));
  };
  return {grid, e, e, "root-average"};
}

LinearMap restrict_to_mean_zero(const LinearMap& map) {
  auto center = [](const StepFunction& f) {
    return f - StepFunction::constant(f.grid(), average(f, DyadicNode::root()));
  };
  LinearMap out = map;
  out.apply = [map, center](const StepFunction& f) { return map.apply(center(f)); };
  out.apply_transpose = [map, center](const StepFunction& g) { return center(map.apply_transpose(g)); };
  out.name = map.name + "|mean-zero";
  return out;
}

LinearMap weighted_adjoint(const LinearMap& map, const std::vector<double>& w) {
  if (w.size() != map.grid.leaf_count()) throw GridError("weight does not match operator grid");
  LinearMap out = map;
  out.apply = [map, w](const StepFunction& f) {
    return pointwise(map.apply_transpose(pointwise(f, w, false)), w, true);
  };
  out.apply_transpose = [map, w](const StepFunction& g) {
    return pointwise(map.apply(pointwise(g, w, true)), w, false);
  };
  out.name = map.name + "*w";
  return out;
}

// --- multipliers -------------------------------------------------------------

MultiplierSpec::MultiplierSpec(DyadicGrid grid, std::vector<double> sigma)
    : grid_(grid), sigma_(std::move(sigma)) {
  if (sigma_.size() != grid_.leaf_count()) {
    throw ValidationError("multiplier needs one sigma per internal node (heap layout of size 2^N)");
  }
  sigma_[0] = 0.0;
  for (std::size_t h = 1; h < sigma_.size(); ++h) {
    if (!(std::abs(sigma_[h]) <= 1.0)) {
      throw ValidationError("|sigma| > 1 at node " + node_name(DyadicNode::from_heap_index(h)));
    }
  }
}

MultiplierSpec MultiplierSpec::constant(const DyadicGrid& grid, double s) {
  return MultiplierSpec(grid, std::vector<double>(grid.leaf_count(), s));
}

MultiplierSpec MultiplierSpec::random(const DyadicGrid& grid, Rng& rng) {
  std::vector<double> s(grid.leaf_count(), 0.0);
  for (std::size_t h = 1; h < s.size(); ++h) s[h] = rng.uniform(-1.0, 1.0);
  return MultiplierSpec(grid, std::move(s));
}

MultiplierSpec MultiplierSpec::single(const DyadicGrid& grid, const DyadicNode& node, double s) {
  if (node.level() >= grid.depth()) throw GridError("multiplier node must be internal");
  std::vector<double> sigma(grid.leaf_count(), 0.0);
  sigma[node.heap_index()] = s;
  return MultiplierSpec(grid, std::move(sigma));
}

double MultiplierSpec::sigma(const DyadicNode& node) const {
  if (node.level() >= grid_.depth()) throw GridError("leaves carry no multiplier");
  return sigma_[node.heap_index()];
}

double MultiplierSpec::max_abs() const noexcept {
  double m = 0.0;
  for (std::size_t h = 1; h < sigma_.size(); ++h) m = std::max(m, std::abs(sigma_[h]));
  return m;
}

StepFunction apply_multiplier(const MultiplierSpec& spec, const StepFunction& f) {
  if (!(f.grid() == spec.grid())) throw GridError("multiplier and function live on different grids");
  HaarExpansion e = haar_expand(f);
  const auto& sigma = spec.sigma_values();
  for (std::size_t h = 1; h < e.detail.size(); ++h) e.detail[h] *= sigma[h];
  return reconstruct(e);
}

LinearMap as_map(const MultiplierSpec& spec) {
  auto t = [spec](const StepFunction& f) { return apply_multiplier(spec, f); };
  return {spec.grid(), t, t, "multiplier"};
}

// --- general Haar shifts -----------------------------------------------------

HaarShiftSpec::HaarShiftSpec(DyadicGrid grid, int complexity, std::vector<Entry> entries)
    : grid_(grid), complexity_(complexity), entries_(std::move(entries)) {
  if (complexity_ < 1) throw ValidationError("Haar shift complexity must be >= 1");
  if (complexity_ > grid_.depth()) throw ValidationError("complexity exceeds grid depth");
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.q.heap_index() < b.q.heap_index(); });
  const std::size_t blocks = block_count();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    if (i > 0 && entries_[i - 1].q == e.q) throw ValidationError("duplicate shift entry at Q = " + node_name(e.q));
    if (e.q.level() + complexity_ > grid_.depth()) {
      throw ValidationError("shift entry Q = " + node_name(e.q) + " needs more depth than the grid has");
    }
    if (e.kernel.size() != blocks * blocks) {
      throw ValidationError("kernel at Q = " + node_name(e.q) + " must be " + std::to_string(blocks) + "x" +
                            std::to_string(blocks));
    }
    const double bound = 1.0 / e.q.length();
    for (double k : e.kernel) {
      if (!(std::abs(k) <= bound * (1.0 + 1e-12))) {
        throw ValidationError("kernel sup-norm exceeds |Q|^{-1} at Q = " + node_name(e.q));
      }
    }
  }
}

HaarShiftSpec HaarShiftSpec::random(const DyadicGrid& grid, int complexity, Rng& rng) {
  std::vector<Entry> entries;
  const std::size_t blocks = std::size_t{1} << complexity;
  for (int level = 0; level + complexity <= grid.depth(); ++level) {
    for (std::int64_t p = 0; p < (std::int64_t{1} << level); ++p) {
      DyadicNode q(level, p);
      std::vector<double> kernel(blocks * blocks);
      const double bound = 1.0 / q.length();
      for (double& k : kernel) k = bound * rng.sign();
      entries.push_back({q, std::move(kernel)});
    }
  }
  return HaarShiftSpec(grid, complexity, std::move(entries));
}

std::vector<int> HaarShiftSpec::active_levels() const {
  std::set<int> levels;
  for (const auto& e : entries_) levels.insert(e.q.level());
  return {levels.begin(), levels.end()};
}

StepFunction apply_haar_shift(const HaarShiftSpec& spec, const StepFunction& f) {
  const DyadicGrid& grid = spec.grid();
  if (!(f.grid() == grid)) throw GridError("shift and function live on different grids");
  const auto avg = all_averages(f);
  const int n = spec.complexity();
  const std::size_t blocks = spec.block_count();
  std::vector<double> inc(grid.node_slots(), 0.0);
  std::vector<double> out(blocks);
  for (const auto& e : spec.entries()) {
    const auto phi = mart_diff_n_blocks(grid, avg, e.q, n);
    const double block_measure = e.q.length() / static_cast<double>(blocks);
    double mean = 0.0;
    for (std::size_t i = 0; i < blocks; ++i) {
      double s = 0.0;
      const double* row = e.kernel.data() + i * blocks;
      for (std::size_t j = 0; j < blocks; ++j) s += row[j] * phi[j];
      out[i] = s * block_measure;
      mean += out[i];
    }
    mean /= static_cast<double>(blocks);
    const std::size_t first = e.q.heap_index() << n;
    for (std::size_t i = 0; i < blocks; ++i) inc[first + i] += out[i] - mean;
  }
  return push_down(grid, std::move(inc));
}

HaarShiftSpec transpose(const HaarShiftSpec& spec) {
  const std::size_t b = spec.block_count();
  std::vector<HaarShiftSpec::Entry> entries;
  entries.reserve(spec.entries().size());
  for (const auto& e : spec.entries()) {
    std::vector<double> t(b * b);
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < b; ++j) t[j * b + i] = e.kernel[i * b + j];
    entries.push_back({e.q, std::move(t)});
  }
  return HaarShiftSpec(spec.grid(), spec.complexity(), std::move(entries));
}

LinearMap as_map(const HaarShiftSpec& spec) {
  HaarShiftSpec t = transpose(spec);
  return {spec.grid(), [spec](const StepFunction& f) { return apply_haar_shift(spec, f); },
          [t](const StepFunction& g) { return apply_haar_shift(t, g); },
          "haar-shift(n=" + std::to_string(spec.complexity()) + ")"};
}

HaarShiftSpec slice(const HaarShiftSpec& spec, int k) {
  const int n = spec.complexity();
  if (k < 0 || k >= n) {
    throw ValidationError("slice index " + std::to_string(k) + " outside [0, " + std::to_string(n) + ")");
  }
  std::vector<HaarShiftSpec::Entry> kept;
  for (const auto& e : spec.entries()) {
    if ((e.q.level() + k) % n == 0) kept.push_back(e);
  }
  return HaarShiftSpec(spec.grid(), n, std::move(kept));
}

std::vector<LocalBilinear> local_bilinear(const HaarShiftSpec& spec, const StepFunction& f,
                                          const StepFunction& g) {
  require_same_grid(f, g);
  if (!(f.grid() == spec.grid())) throw GridError("shift and functions live on different grids");
  const auto avg_f = all_averages(f);
  const auto avg_g = all_averages(g);
  const int n = spec.complexity();
  const std::size_t blocks = spec.block_count();
  std::vector<LocalBilinear> out;
  out.reserve(spec.entries().size());
  for (const auto& e : spec.entries()) {
    const auto phi = mart_diff_n_blocks(spec.grid(), avg_f, e.q, n);
    const auto gamma = mart_diff_n_blocks(spec.grid(), avg_g, e.q, n);
    const double jm = e.q.length() / static_cast<double>(blocks);
    double value = 0.0;
    double l1_f = 0.0;
    double l1_g = 0.0;
    for (std::size_t i = 0; i < blocks; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < blocks; ++j) s += e.kernel[i * blocks + j] * phi[j];
      value += s * jm * gamma[i] * jm;
      l1_f += std::abs(phi[i]) * jm;
      l1_g += std::abs(gamma[i]) * jm;
    }
    out.push_back({e.q, value, l1_f * l1_g / e.q.length()});
  }
  return out;
}

// --- elementary shifts -------------------------------------------------------

ElementaryShiftSpec::ElementaryShiftSpec(DyadicGrid grid, int m, int n, std::vector<Entry> entries)
    : grid_(grid), m_(m), n_(n), entries_(std::move(entries)) {
  if (m_ < 0 || n_ < 0) throw ValidationError("elementary shift parameters must be >= 0");
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.q.heap_index() < b.q.heap_index(); });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    const std::string where = " at Q = " + node_name(e.q);
    if (i > 0 && entries_[i - 1].q == e.q) throw ValidationError("duplicate entry" + where);
    if (e.q.level() + complexity() > grid_.depth()) throw ValidationError("grid too shallow for entry" + where);
    for (const auto& p : e.pairs) {
      if (p.source.node().level() != e.q.level() + m_ || !e.q.contains(p.source.node())) {
        throw ValidationError("source Haar vector is not in chld_m(Q)" + where);
      }
      if (p.target.node().level() != e.q.level() + n_ || !e.q.contains(p.target.node())) {
        throw ValidationError("target Haar vector is not in chld_n(Q)" + where);
      }
      if (!(p.source.sup_norm() * p.target.sup_norm() <= 1.0 + 1e-12)) {
        throw ValidationError("normalization ||h'||_inf ||h''||_inf <= 1 violated" + where);
      }
    }
  }
}

ElementaryShiftSpec ElementaryShiftSpec::random(const DyadicGrid& grid, int m, int n, Rng& rng,
                                                double product) {
  std::vector<Entry> entries;
  const int c = std::max(m, n) + 1;
  for (int level = 0; level + c <= grid.depth(); ++level) {
    for (std::int64_t p = 0; p < (std::int64_t{1} << level); ++p) {
      DyadicNode q(level, p);
      Entry e{q, {}};
      for (const auto& src : children(q, m)) {
        for (const auto& dst : children(q, n)) {
          const double scale = std::exp(rng.uniform(-1.0, 1.0));
          const double s_sign = rng.sign();
          const double t_sign = rng.sign();
          HaarVector source(src, {s_sign * scale, -s_sign * scale});
          HaarVector target(dst, {t_sign * product / scale, -t_sign * product / scale});
          e.pairs.push_back({source, target});
        }
      }
      entries.push_back(std::move(e));
    }
  }
  return ElementaryShiftSpec(grid, m, n, std::move(entries));
}

StepFunction apply_elementary_shift(const ElementaryShiftSpec& spec, const StepFunction& f) {
  const DyadicGrid& grid = spec.grid();
  if (!(f.grid() == grid)) throw GridError("shift and function live on different grids");
  const auto avg = all_averages(f);
  std::vector<double> inc(grid.node_slots(), 0.0);
  for (const auto& e : spec.entries()) {
    const double inv_q = 1.0 / e.q.length();
    for (const auto& p : e.pairs) {
      const double c = inv_q * p.source.pair_with_averages(avg);
      const std::size_t h = p.target.node().heap_index();
      inc[2 * h] += c * p.target.coefficients()[0];
      inc[2 * h + 1] += c * p.target.coefficients()[1];
    }
  }
  return push_down(grid, std::move(inc));
}

ElementaryShiftSpec adjoint(const ElementaryShiftSpec& spec) {
  std::vector<ElementaryShiftSpec::Entry> entries;
  for (const auto& e : spec.entries()) {
    ElementaryShiftSpec::Entry t{e.q, {}};
    for (const auto& p : e.pairs) t.pairs.push_back({p.target, p.source});
    entries.push_back(std::move(t));
  }
  return ElementaryShiftSpec(spec.grid(), spec.n(), spec.m(), std::move(entries));
}

LinearMap as_map(const ElementaryShiftSpec& spec) {
  ElementaryShiftSpec t = adjoint(spec);
  return {spec.grid(), [spec](const StepFunction& f) { return apply_elementary_shift(spec, f); },
          [t](const StepFunction& g) { return apply_elementary_shift(t, g); },
          "elementary-shift(m=" + std::to_string(spec.m()) + ",n=" + std::to_string(spec.n()) + ")"};
}

HaarShiftSpec to_general(const ElementaryShiftSpec& spec) {
  const int c = spec.complexity();
  const std::size_t blocks = std::size_t{1} << c;
  std::vector<HaarShiftSpec::Entry> entries;
  entries.reserve(spec.entries().size());
  // Values of a Haar vector on the chld_c(Q) blocks it covers.
  auto spread = [&](const HaarVector& h, const DyadicNode& q, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    const int rel = h.node().level() - q.level();
    const std::size_t width = std::size_t{1} << (c - rel - 1);
    const std::size_t first =
        static_cast<std::size_t>(h.node().position() - (q.position() << rel)) << (c - rel);
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t b = 0; b < width; ++b) out[first + k * width + b] = h.coefficients()[k];
  };
  std::vector<double> x(blocks);
  std::vector<double> y(blocks);
  for (const auto& e : spec.entries()) {
    std::vector<double> a(blocks * blocks, 0.0);
    for (const auto& p : e.pairs) {
      spread(p.target, e.q, x);
      spread(p.source, e.q, y);
      for (std::size_t i = 0; i < blocks; ++i) {
        if (x[i] == 0.0) continue;
        for (std::size_t j = 0; j < blocks; ++j) a[i * blocks + j] += x[i] * y[j];
      }
    }
    const double inv_q = 1.0 / e.q.length();
    for (double& v : a) {
      if (std::abs(v) > 1.0 + 1e-12) {
        throw ContractViolation("assembled kernel a_Q exceeds 1 in sup-norm at Q = " + node_name(e.q));
      }
      v *= inv_q;
    }
    entries.push_back({e.q, std::move(a)});
  }
  return HaarShiftSpec(spec.grid(), c, std::move(entries));
}

// --- paraproducts --------------------------------------------------------------

ParaproductSpec::ParaproductSpec(StepFunction phi) : phi_(std::move(phi)), expansion_(haar_expand(phi_)) {}

StepFunction apply_paraproduct(const ParaproductSpec& spec, const StepFunction& f) {
  require_same_grid(f, spec.phi());
  const auto avg = all_averages(f);
  HaarExpansion e = spec.expansion();
  e.root_average = 0.0;
  for (std::size_t h = 1; h < e.detail.size(); ++h) e.detail[h] *= avg[h];
  return reconstruct(e);
}

StepFunction apply_paraproduct_transpose(const ParaproductSpec& spec, const StepFunction& g) {
  require_same_grid(g, spec.phi());
  const DyadicGrid& grid = spec.grid();
  const HaarExpansion eg = haar_expand(g);
  const auto& ephi = spec.expansion().detail;
  std::vector<double> inc(grid.node_slots(), 0.0);
  for (std::size_t h = 1; h < grid.leaf_count(); ++h) {
    inc[h] = ephi[h] * eg.detail[h] / DyadicNode::from_heap_index(h).length();
  }
  return push_down(grid, std::move(inc));
}

LinearMap as_map(const ParaproductSpec& spec) {
  return {spec.grid(), [spec](const StepFunction& f) { return apply_paraproduct(spec, f); },
          [spec](const StepFunction& g) { return apply_paraproduct_transpose(spec, g); }, "paraproduct"};
}

double bmo_norm(const StepFunction& phi) {
  const HaarExpansion e = haar_expand(phi);
  const std::size_t leaves = phi.grid().leaf_count();
  std::vector<double> carleson(2 * leaves, 0.0);
  double best = 0.0;
  for (std::size_t h = leaves - 1; h >= 1; --h) {
    carleson[h] = e.detail[h] * e.detail[h] + carleson[2 * h] + carleson[2 * h + 1];
    best = std::max(best, carleson[h] / DyadicNode::from_heap_index(h).length());
  }
  return std::sqrt(best);
}

}  // namespace haarlab::ops
