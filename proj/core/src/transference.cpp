#include "haarlab/transference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "haarlab/error.hpp"

namespace haarlab {

namespace {

double coord_scale(const BellmanPoint& x) {
  return std::max({std::abs(x.f), std::abs(x.g), std::abs(x.F), std::abs(x.G), std::abs(x.u), std::abs(x.v)});
}

double max_abs_diff(const BellmanPoint& a, const BellmanPoint& b) { return coord_scale(a - b); }

std::string heap_name(std::size_t h) {
  int level = 0;
  while ((std::size_t{2} << level) <= h) ++level;
  return std::to_string(level) + "/" + std::to_string(h - (std::size_t{1} << level));
}

// Averages (x_{2h} + x_{2h+1}) / 2 upward over a full heap whose leaves
// start at `leaves`.
template <class T>
void average_up(std::vector<T>& heap, std::size_t leaves) {
  for (std::size_t h = leaves - 1; h >= 1; --h) heap[h] = (heap[2 * h] + heap[2 * h + 1]) * 0.5;
}

}  // namespace

// --- trees ---------------------------------------------------------------------

MartingaleTree::MartingaleTree(double A, int n, std::vector<BellmanPoint> nodes)
    : A_(A), n_(n), nodes_(std::move(nodes)) {
  if (!(A_ >= 1.0)) throw ValidationError("tree A must be >= 1");
  if (n_ < 1 || n_ > 20) throw ValidationError("tree depth must be in [1, 20]");
  if (nodes_.size() != (std::size_t{2} << n_)) {
    throw ValidationError("tree of depth " + std::to_string(n_) + " needs " + std::to_string((2u << n_) - 1) +
                          " nodes");
  }
  for (std::size_t h = 1; h < nodes_.size(); ++h) {
    if (!in_domain(nodes_[h], A_)) throw ValidationError("node " + heap_name(h) + " is outside Dom(B_A)");
  }
  for (std::size_t h = 1; h < leaf_count(); ++h) {
    const BellmanPoint mid = midpoint(nodes_[2 * h], nodes_[2 * h + 1]);
    const double scale = std::max(coord_scale(nodes_[h]), std::numeric_limits<double>::min());
    if (max_abs_diff(mid, nodes_[h]) > 1e-12 * scale) {
      throw ValidationError("martingale dynamics fail at node " + heap_name(h));
    }
  }
}

const BellmanPoint& MartingaleTree::at(int level, std::int64_t pos) const {
  if (level < 0 || level > n_ || pos < 0 || pos >= (std::int64_t{1} << level)) {
    throw GridError("tree node " + std::to_string(level) + "/" + std::to_string(pos) + " out of range");
  }
  return nodes_[(std::size_t{1} << level) + static_cast<std::size_t>(pos)];
}

MartingaleTree tree_from_data(double A, int n, const std::vector<double>& f, const std::vector<double>& g,
                              const std::vector<double>& w) {
  const std::size_t cells = f.size();
  if (g.size() != cells || w.size() != cells || cells < (std::size_t{1} << n) || (cells & (cells - 1)) != 0) {
    throw ValidationError("tree data must be three arrays of equal power-of-two length >= 2^n");
  }
  std::vector<BellmanPoint> heap(2 * cells);
  for (std::size_t j = 0; j < cells; ++j) {
    if (!(w[j] > 0.0)) throw ValidationError("weight must be positive in tree data");
    heap[cells + j] = {f[j], g[j], f[j] * f[j] * w[j], g[j] * g[j] / w[j], w[j], 1.0 / w[j]};
  }
  average_up(heap, cells);
  heap.resize(std::size_t{2} << n);
  return MartingaleTree(A, n, std::move(heap));
}

namespace {

// Haar synthesis with +-1 Haar functions: value on a cell is the root
// offset plus the signed coefficients of its ancestors.
std::vector<double> synthesize(int levels, Rng& rng, bool even, bool odd, double spread) {
  const std::size_t cells = std::size_t{1} << levels;
  std::vector<double> coef(cells, 0.0);
  for (std::size_t h = 1; h < cells; ++h) {
    int level = 0;
    while ((std::size_t{2} << level) <= h) ++level;
    const bool on = level % 2 == 0 ? even : odd;
    if (on) coef[h] = spread * rng.normal();
  }
  const double offset = rng.normal();
  std::vector<double> out(cells);
  for (std::size_t j = 0; j < cells; ++j) {
    double s = offset;
    std::size_t node = cells + j;
    while (node > 1) {
      const std::size_t parent = node / 2;
      s += (node % 2 == 0 ? 1.0 : -1.0) * coef[parent];
      node = parent;
    }
    out[j] = s;
  }
  return out;
}

double max_uv(const std::vector<double>& w) {
  const std::size_t cells = w.size();
  std::vector<double> u(2 * cells), v(2 * cells);
  for (std::size_t j = 0; j < cells; ++j) {
    u[cells + j] = w[j];
    v[cells + j] = 1.0 / w[j];
  }
  average_up(u, cells);
  average_up(v, cells);
  double best = 1.0;
  for (std::size_t h = 1; h < cells; ++h) best = std::max(best, u[h] * v[h]);
  return best;
}

}  // namespace

MartingaleTree random_martingale_tree(int n, double A, Rng& rng, TreeKind kind) {
  if (n < 1) throw ValidationError("tree depth must be >= 1");
  if (!(A >= 1.0)) throw ValidationError("tree A must be >= 1");
  const int levels = n + static_cast<int>(rng.index(3));
  const std::size_t cells = std::size_t{1} << levels;

  // Cascade: log w = delta * (sum of edge signs); halve delta until uv <= A.
  std::vector<double> path(2 * cells, 0.0);
  for (std::size_t h = 2; h < path.size(); ++h) path[h] = path[h / 2] + rng.sign();
  double delta = rng.uniform(0.1, 1.2);
  std::vector<double> w(cells);
  for (int attempt = 0; attempt < 80; ++attempt) {
    for (std::size_t j = 0; j < cells; ++j) w[j] = std::exp(delta * path[cells + j]);
    if (max_uv(w) <= A) break;
    delta *= 0.5;
  }
  const double scale = std::exp(rng.uniform(-1.0, 1.0));
  for (double& x : w) x *= scale;

  const bool f_even = kind != TreeKind::g_only;
  const bool f_odd = kind == TreeKind::generic || kind == TreeKind::f_only;
  const bool g_even = kind == TreeKind::generic || kind == TreeKind::g_only;
  const bool g_odd = kind != TreeKind::f_only;
  auto f = synthesize(levels, rng, f_even, f_odd, rng.uniform(0.2, 2.0));
  auto g = synthesize(levels, rng, g_even, g_odd, rng.uniform(0.2, 2.0));
  return tree_from_data(A, n, f, g, w);
}

ParaTree::ParaTree(MartingaleTree tree, std::vector<double> M) : tree_(std::move(tree)), M_(std::move(M)), d_(0.0) {
  const std::size_t leaves = tree_.leaf_count();
  if (M_.size() != 2 * leaves) throw ValidationError("one M value per tree node is required");
  for (std::size_t h = 1; h < M_.size(); ++h) {
    if (!(M_[h] >= -1e-12 && M_[h] <= 1.0 + 1e-12)) {
      throw ValidationError("M outside [0, 1] at node " + heap_name(h));
    }
  }
  for (std::size_t h = 2; h < leaves; ++h) {
    if (std::abs(M_[h] - 0.5 * (M_[2 * h] + M_[2 * h + 1])) > 1e-12) {
      throw ValidationError("M dynamics fail at node " + heap_name(h));
    }
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < leaves; ++i) mean += M_[leaves + i];
  mean /= static_cast<double>(leaves);
  d_ = M_[1] - mean;
  if (d_ < -1e-12) throw ValidationError("negative Carleson decrement d at the root: " + std::to_string(d_));
  d_ = std::max(d_, 0.0);
}

ParaTree random_para_tree(int n, double A, Rng& rng) {
  static constexpr TreeKind kinds[] = {TreeKind::generic, TreeKind::alternating, TreeKind::generic, TreeKind::g_only};
  MartingaleTree tree = random_martingale_tree(n, A, rng, kinds[rng.index(4)]);
  const std::size_t leaves = tree.leaf_count();
  std::vector<double> M(2 * leaves, 0.0);
  const double top = rng.uniform();
  for (std::size_t i = 0; i < leaves; ++i) M[leaves + i] = top * rng.uniform();
  average_up(M, leaves);
  M[1] += rng.coin(0.1) ? 0.0 : (1.0 - M[1]) * rng.uniform();
  return ParaTree(std::move(tree), std::move(M));
}

ParaTree para_tree_from_symbol(double A, int n, const std::vector<double>& phi, const std::vector<double>& f,
                               const std::vector<double>& g, const std::vector<double>& w) {
  MartingaleTree tree = tree_from_data(A, n, f, g, w);
  const std::size_t cells = phi.size();
  if (cells != f.size()) throw ValidationError("symbol and data must share the cell count");
  std::vector<double> avg(2 * cells);
  for (std::size_t j = 0; j < cells; ++j) avg[cells + j] = phi[j];
  average_up(avg, cells);
  // Carleson sums S_I = sum_{J subset I} ||Delta_J phi||_2^2, |I_0| = 1.
  std::vector<double> carl(2 * cells, 0.0);
  for (std::size_t h = cells - 1; h >= 1; --h) {
    int level = 0;
    while ((std::size_t{2} << level) <= h) ++level;
    const double len = std::ldexp(1.0, -level);
    const double diff = 0.5 * (avg[2 * h] - avg[2 * h + 1]);
    carl[h] = diff * diff * len + carl[2 * h] + carl[2 * h + 1];
  }
  const std::size_t leaves = tree.leaf_count();
  std::vector<double> M(2 * leaves);
  for (std::size_t h = 1; h < 2 * leaves; ++h) {
    int level = 0;
    while ((std::size_t{2} << level) <= h) ++level;
    M[h] = carl[h] * std::ldexp(1.0, level);
  }
  return ParaTree(std::move(tree), std::move(M));
}

// --- plank functional ------------------------------------------------------------

namespace {

constexpr double kThird = 1.0 / 3.0;

std::vector<double> top_half_vertex(const std::vector<double>& c) {
  const std::size_t n = c.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return c[i] > c[j]; });
  std::vector<double> v(n);
  for (std::size_t r = 0; r < n; ++r) v[order[r]] = r < n / 2 ? kThird : -kThird;
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Positive and negative parts summed separately in ascending magnitude, so
// a vector made of exactly opposite pairs sums to exactly zero.
double balanced_sum(const std::vector<double>& a) {
  std::vector<double> pos, neg;
  for (double x : a) (x >= 0.0 ? pos : neg).push_back(std::abs(x));
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  return std::accumulate(pos.begin(), pos.end(), 0.0) - std::accumulate(neg.begin(), neg.end(), 0.0);
}

double l1(const std::vector<double>& a) {
  double s = 0.0;
  for (double x : a) s += std::abs(x);
  return s;
}

// max over the box-and-sum polytope of min(p.alpha, q.alpha).
std::vector<double> maximin(const std::vector<double>& p, const std::vector<double>& q, double& value) {
  const std::size_t n = p.size();
  std::vector<double> breaks{0.0, 1.0};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double denom = (p[i] - q[i]) - (p[j] - q[j]);
      if (denom == 0.0) continue;
      const double lam = (q[j] - q[i]) / denom;
      if (lam > 0.0 && lam < 1.0) breaks.push_back(lam);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  std::vector<std::vector<double>> vertices;
  std::vector<double> c(n);
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double lam = 0.5 * (breaks[k] + breaks[k + 1]);
    for (std::size_t i = 0; i < n; ++i) c[i] = lam * p[i] + (1.0 - lam) * q[i];
    vertices.push_back(top_half_vertex(c));
  }

  std::vector<double> best;
  value = -std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<double>& alpha) {
    const double val = std::min(dot(p, alpha), dot(q, alpha));
    if (val > value) {
      value = val;
      best = alpha;
    }
  };
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    consider(vertices[k]);
    if (k + 1 == vertices.size()) break;
    const auto& v0 = vertices[k];
    const auto& v1 = vertices[k + 1];
    const double d0 = dot(p, v0) - dot(q, v0);
    const double d1 = dot(p, v1) - dot(q, v1);
    if (d0 == d1 || (d0 > 0.0) == (d1 > 0.0)) continue;
    const double t = d1 / (d1 - d0);  // t v0 + (1 - t) v1 balances p and q
    std::vector<double> mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = v0[i] == v1[i] ? v0[i] : t * v0[i] + (1.0 - t) * v1[i];
    consider(mix);
  }
  return best;
}

}  // namespace

PlankFunctional plank_alpha(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (b.size() != n || n < 2 || n % 2 != 0) throw ValidationError("plank vectors must have equal even length");
  const double na = l1(a);
  const double nb = l1(b);
  if (na == 0.0 && nb == 0.0) throw ValidationError("degenerate tree: both difference vectors vanish");

  PlankFunctional out;
  if (na == 0.0 || nb == 0.0) {
    out.alpha = top_half_vertex(na == 0.0 ? b : a);
  } else {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> p(n), q(n);
    for (int s1 : {1, -1}) {
      for (int s2 : {1, -1}) {
        for (std::size_t i = 0; i < n; ++i) {
          p[i] = s1 * a[i] / na;
          q[i] = s2 * b[i] / nb;
        }
        double val = 0.0;
        auto alpha = maximin(p, q, val);
        if (val > best) {
          best = val;
          out.alpha = std::move(alpha);
          out.sign_f = s1;
          out.sign_g = s2;
        }
      }
    }
  }
  out.ratio_f = na == 0.0 ? 1.0 : std::abs(dot(out.alpha, a)) / na;
  out.ratio_g = nb == 0.0 ? 1.0 : std::abs(dot(out.alpha, b)) / nb;
  out.sum = balanced_sum(out.alpha);

  const double eps = std::numeric_limits<double>::epsilon();
  if (std::abs(out.sum) > 4.0 * eps * static_cast<double>(n)) {
    throw ContractViolation("plank functional does not sum to zero: " + std::to_string(out.sum));
  }
  for (double x : out.alpha) {
    if (std::abs(x) > kThird) throw ContractViolation("plank coefficient exceeds 1/3");
  }
  if (out.ratio_f < 1.0 / 12.0 - 1e-12 || out.ratio_g < 1.0 / 12.0 - 1e-12) {
    throw ContractViolation("plank functional misses the 1/12 contract (f " + std::to_string(out.ratio_f) +
                            ", g " + std::to_string(out.ratio_g) + ")");
  }
  return out;
}

PlankFunctional plank_alpha(const MartingaleTree& tree) {
  const std::size_t leaves = tree.leaf_count();
  std::vector<double> a(leaves), b(leaves);
  for (std::size_t i = 0; i < leaves; ++i) {
    a[i] = tree.leaf(i).f - tree.root().f;
    b[i] = tree.leaf(i).g - tree.root().g;
  }
  return plank_alpha(a, b);
}

std::vector<double> para_alpha(const std::vector<double>& b) {
  const std::size_t n = b.size();
  if (n < 2) throw ValidationError("para alpha needs at least two leaves");
  std::vector<double> s(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = b[i] > 0.0 ? 1.0 : (b[i] < 0.0 ? -1.0 : 0.0);
    mean += s[i];
  }
  mean /= static_cast<double>(n);
  for (double& x : s) x = (x - mean) / 6.0;
  return s;
}

// --- modified martingale -----------------------------------------------------------

namespace {

ModifiedTree build_core(const MartingaleTree& tree, const std::vector<double>& alpha, const std::vector<double>* M) {
  const std::size_t leaves = tree.leaf_count();
  if (alpha.size() != leaves) throw ValidationError("one alpha per tree leaf is required");
  ModifiedTree mod;
  mod.n = tree.depth();
  mod.x_plus.resize(leaves);
  mod.x_minus.resize(leaves);
  for (int sign : {1, -1}) {
    auto& x = sign > 0 ? mod.x_plus : mod.x_minus;
    auto& S = sign > 0 ? mod.sum_plus : mod.sum_minus;
    auto& X = sign > 0 ? mod.X_plus : mod.X_minus;
    auto& theta = sign > 0 ? mod.theta_plus : mod.theta_minus;
    auto& MM = sign > 0 ? mod.M_plus : mod.M_minus;
    S.assign(2 * leaves, 0.0);
    X.assign(2 * leaves, BellmanPoint{});
    theta.assign(2 * leaves, 0.0);
    std::vector<BellmanPoint> W(2 * leaves);
    std::vector<double> WM(M ? 2 * leaves : 0, 0.0);
    for (std::size_t i = 0; i < leaves; ++i) {
      x[i] = 1.0 + sign * alpha[i];
      S[leaves + i] = x[i];
      W[leaves + i] = tree.leaf(i) * x[i];
      if (M) WM[leaves + i] = (*M)[leaves + i] * x[i];
    }
    for (std::size_t h = leaves - 1; h >= 1; --h) {
      S[h] = S[2 * h] + S[2 * h + 1];
      W[h] = W[2 * h] + W[2 * h + 1];
      if (M) WM[h] = WM[2 * h] + WM[2 * h + 1];
    }
    for (std::size_t h = 1; h < leaves; ++h) X[h] = W[h] * (1.0 / S[h]);
    for (std::size_t i = 0; i < leaves; ++i) X[leaves + i] = tree.leaf(i);
    for (std::size_t h = 2; h < 2 * leaves; ++h) theta[h] = S[h] / S[h / 2];
    if (M) {
      MM.assign(2 * leaves, 0.0);
      for (std::size_t h = 1; h < leaves; ++h) MM[h] = WM[h] / S[h];
      for (std::size_t i = 0; i < leaves; ++i) MM[leaves + i] = (*M)[leaves + i];
    }
  }
  return mod;
}

}  // namespace

ModifiedTree build_modified(const MartingaleTree& tree, const std::vector<double>& alpha) {
  return build_core(tree, alpha, nullptr);
}

ModifiedTree build_modified(const ParaTree& tree, const std::vector<double>& alpha) {
  return build_core(tree.tree(), alpha, &tree.M());
}

IdentityReport check_identities(const MartingaleTree& tree, const ModifiedTree& mod) {
  IdentityReport r;
  const std::size_t leaves = tree.leaf_count();
  const double two_n = static_cast<double>(leaves);
  for (int sign : {1, -1}) {
    const auto& X = mod.X(sign);
    const auto& th = mod.theta(sign);
    const auto& x = mod.x(sign);
    for (std::size_t h = 2; h < 2 * leaves; ++h) r.min_theta = std::min(r.min_theta, th[h]);
    for (std::size_t h = 1; h < leaves; ++h) {
      r.max_theta_sum_error = std::max(r.max_theta_sum_error, std::abs(th[2 * h] + th[2 * h + 1] - 1.0));
      const BellmanPoint mix = X[2 * h] * th[2 * h] + X[2 * h + 1] * th[2 * h + 1];
      const double scale = std::max({coord_scale(X[h]), coord_scale(X[2 * h]), coord_scale(X[2 * h + 1]),
                                     std::numeric_limits<double>::min()});
      r.max_midpoint_error = std::max(r.max_midpoint_error, max_abs_diff(mix, X[h]) / scale);
    }
    for (std::size_t i = 0; i < leaves; ++i) {
      double prod = 1.0;
      for (std::size_t h = leaves + i; h > 1; h /= 2) prod *= th[h];
      const double want = x[i] / two_n;
      r.max_product_error = std::max(r.max_product_error, std::abs(prod - want) / want);
    }
  }
  const BellmanPoint root_mid = midpoint(mod.X_plus[1], mod.X_minus[1]);
  r.max_root_error = max_abs_diff(root_mid, tree.root()) /
                     std::max(coord_scale(tree.root()), std::numeric_limits<double>::min());
  return r;
}

DomainReport verify_domains(const MartingaleTree& tree, const ModifiedTree& mod) {
  DomainReport r;
  const double A = tree.A();
  const std::size_t leaves = tree.leaf_count();
  const double slack = 1.0 + 1e-12;
  for (int sign : {1, -1}) {
    const auto& X = mod.X(sign);
    const char* s = sign > 0 ? "+" : "-";
    for (std::size_t h = 1; h < 2 * leaves; ++h) {
      ++r.checked_nodes;
      const BellmanPoint& p = X[h];
      const BellmanPoint& orig = tree.at(h);
      r.worst_uv_ratio = std::max(r.worst_uv_ratio, p.u * p.v / (4.0 * A));
      r.worst_u_ratio = std::max({r.worst_u_ratio, p.u / (2.0 * orig.u), p.v / (2.0 * orig.v)});
      if (!in_domain(p, 4.0 * A)) {
        throw ContractViolation(std::string("X^") + s + " at node " + heap_name(h) + " is outside Dom(B_4A)");
      }
      if (r.worst_u_ratio > slack) {
        throw ContractViolation(std::string("u or v of X^") + s + " at node " + heap_name(h) + " exceeds twice the original");
      }
    }
    for (std::size_t h = 1; h < leaves; ++h) {
      ++r.checked_segments;
      const BellmanPoint center = midpoint(X[2 * h], X[2 * h + 1]);
      r.worst_center_ratio = std::max(r.worst_center_ratio, center.u * center.v / (4.0 * A));
      SegmentMax seg;
      try {
        seg = segment_max_uv(X[2 * h], X[2 * h + 1], 4.0 * A);
      } catch (const ValidationError& e) {
        throw ContractViolation(std::string("sibling segment of X^") + s + " below node " + heap_name(h) + ": " +
                                e.what());
      }
      r.worst_segment_ratio = std::max(r.worst_segment_ratio, seg.value / (4.5 * A));
      if (seg.value > 4.5 * A * slack) {
        throw ContractViolation(std::string("sibling segment of X^") + s + " below node " + heap_name(h) +
                                " leaves Dom(B_4.5A)");
      }
    }
  }
  return r;
}

// --- main estimate ---------------------------------------------------------------------

namespace {

double mean_abs_diff(const MartingaleTree& tree, bool use_f) {
  double s = 0.0;
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) {
    s += std::abs(use_f ? tree.leaf(i).f - tree.root().f : tree.leaf(i).g - tree.root().g);
  }
  return s / static_cast<double>(tree.leaf_count());
}

struct ViolationSink {
  bool strict;
  std::size_t count = 0;
  void report(const std::string& what, std::vector<BellmanPoint> points) {
    ++count;
    if (strict) throw CandidateViolation(what, std::move(points));
  }
};

double tolerance(std::initializer_list<double> values) {
  double s = 1.0;
  for (double v : values) s += std::abs(v);
  return 1e-9 * s;
}

// Shared tail of both estimates: concavity along the modified tree and the
// telescoped bound B(X^+-) >= 2^{-n} sum x B(X_I). `value(sign, h)` is the
// candidate at node h of the modified tree for that sign.
template <class Value>
void telescope(const MartingaleTree& tree, const ModifiedTree& mod, const Value& value, ViolationSink& sink,
               EstimateReport& rep, const std::vector<double>& leaf_values) {
  const std::size_t leaves = tree.leaf_count();
  rep.concavity_margin = std::numeric_limits<double>::infinity();
  rep.telescoping_margin = std::numeric_limits<double>::infinity();
  for (int sign : {1, -1}) {
    std::vector<double> B(2 * leaves);
    for (std::size_t h = 1; h < leaves; ++h) B[h] = value(sign, h);
    for (std::size_t i = 0; i < leaves; ++i) B[leaves + i] = leaf_values[i];
    const auto& th = mod.theta(sign);
    for (std::size_t h = 1; h < leaves; ++h) {
      const double slackv = B[h] - th[2 * h] * B[2 * h] - th[2 * h + 1] * B[2 * h + 1];
      rep.concavity_margin = std::min(rep.concavity_margin, slackv);
      if (slackv < -tolerance({B[h], B[2 * h], B[2 * h + 1]})) {
        const auto& X = mod.X(sign);
        sink.report("candidate is not concave along the modified tree at node " + heap_name(h),
                    {X[h], X[2 * h], X[2 * h + 1]});
      }
    }
    double avg = 0.0;
    const auto& x = mod.x(sign);
    for (std::size_t i = 0; i < leaves; ++i) avg += x[i] * leaf_values[i];
    avg /= static_cast<double>(leaves);
    rep.telescoping_margin = std::min(rep.telescoping_margin, B[1] - avg);
  }
}

}  // namespace

EstimateReport main_estimate_check(const MartingaleTree& tree, const BellmanCandidate& cand, bool strict) {
  if (!cand.value) throw ValidationError("candidate has no value function");
  EstimateReport rep;
  rep.constant = 72.0;
  const double Ap = 4.5 * tree.A();
  rep.candidate_A = Ap;
  const double gamma = cand.gamma;
  ViolationSink sink{strict};

  rep.plank = plank_alpha(tree);
  const ModifiedTree mod = build_modified(tree, rep.plank.alpha);
  const IdentityReport ids = check_identities(tree, mod);
  rep.product_error = ids.max_product_error;

  const BellmanPoint& x0 = tree.root();
  const BellmanPoint& xp = mod.X_plus[1];
  const BellmanPoint& xm = mod.X_minus[1];
  const double b0 = cand.value(x0, Ap);
  const double bp = cand.value(xp, Ap);
  const double bm = cand.value(xm, Ap);
  const double deficit = b0 - 0.5 * (bp + bm);

  rep.gain_margin = deficit - gamma * std::abs(xp.f - xm.f) * std::abs(xp.g - xm.g);
  if (rep.gain_margin < -tolerance({b0, bp, bm})) sink.report("candidate gain fails on the first step", {x0, xp, xm});

  const double df = std::max(std::abs(xp.f - x0.f), std::abs(xm.f - x0.f));
  const double dg = std::max(std::abs(xp.g - x0.g), std::abs(xm.g - x0.g));
  const double df_lo = std::min(std::abs(xp.f - x0.f), std::abs(xm.f - x0.f));
  const double dg_lo = std::min(std::abs(xp.g - x0.g), std::abs(xm.g - x0.g));
  rep.first_step_margin = deficit / (4.0 * gamma) - df * dg;

  const std::size_t leaves = tree.leaf_count();
  std::vector<double> leaf_b(leaves);
  double mean_b = 0.0;
  for (std::size_t i = 0; i < leaves; ++i) {
    leaf_b[i] = cand.value(tree.leaf(i), Ap);
    mean_b += leaf_b[i];
  }
  mean_b /= static_cast<double>(leaves);

  telescope(
      tree, mod,
      [&](int sign, std::size_t h) {
        if (h == 1) return sign > 0 ? bp : bm;
        return cand.value(mod.X(sign)[h], Ap);
      },
      sink, rep, leaf_b);

  const double drop = b0 - mean_b;
  rep.final_diff_margin = drop / (4.0 * gamma) - df * dg;

  const double mf = mean_abs_diff(tree, true);
  const double mg = mean_abs_diff(tree, false);
  rep.move_margin = std::min(12.0 * df_lo - mf, 12.0 * dg_lo - mg);

  rep.lhs = mf * mg;
  rep.rhs = rep.constant / gamma * drop;
  rep.margin = rep.rhs - rep.lhs;
  rep.candidate_violations = sink.count;
  if (cand.name.rfind("quadratic", 0) == 0) rep.strong_margin = quadratic_strong_margin(tree, cand);
  return rep;
}

EstimateReport para_estimate_check(const ParaTree& ptree, const BellmanCandidate& cand, bool strict) {
  if (!cand.is_para()) throw ValidationError("candidate " + cand.name + " has no paraproduct form");
  const MartingaleTree& tree = ptree.tree();
  EstimateReport rep;
  rep.constant = 36.0;
  const double Ap = 4.5 * tree.A();
  rep.candidate_A = Ap;
  const double gamma = cand.gamma;
  ViolationSink sink{strict};

  const std::size_t leaves = tree.leaf_count();
  std::vector<double> b(leaves);
  for (std::size_t i = 0; i < leaves; ++i) b[i] = tree.leaf(i).g - tree.root().g;
  std::vector<double> alpha = para_alpha(b);
  rep.plank.alpha = alpha;
  rep.plank.ratio_g = l1(b) > 0.0 ? std::abs(dot(alpha, b)) / l1(b) : 1.0;
  rep.plank.ratio_f = 0.0;
  rep.plank.sum = balanced_sum(alpha);

  const ModifiedTree mod = build_modified(ptree, alpha);
  rep.product_error = check_identities(tree, mod).max_product_error;

  const auto& M = ptree.M();
  const BellmanPoint& x0 = tree.root();
  const BellmanPoint& xp = mod.X_plus[1];
  const BellmanPoint& xm = mod.X_minus[1];
  const double b0 = cand.para_value(x0, M[1], Ap);
  const double bp = cand.para_value(xp, mod.M_plus[1], Ap);
  const double bm = cand.para_value(xm, mod.M_minus[1], Ap);
  const double deficit = b0 - 0.5 * (bp + bm);
  const double d_first = M[1] - 0.5 * (mod.M_plus[1] + mod.M_minus[1]);

  rep.gain_margin = deficit - gamma * d_first * std::abs(x0.f) * std::abs(xp.g - xm.g);
  if (rep.gain_margin < -tolerance({b0, bp, bm})) {
    sink.report("para candidate gain fails on the first step", {x0, xp, xm});
  }
  const double dg = std::max(std::abs(xp.g - x0.g), std::abs(xm.g - x0.g));
  const double dg_lo = std::min(std::abs(xp.g - x0.g), std::abs(xm.g - x0.g));
  rep.first_step_margin = deficit / (2.0 * gamma) - ptree.d() * std::abs(x0.f) * dg;

  std::vector<double> leaf_b(leaves);
  double mean_b = 0.0;
  for (std::size_t i = 0; i < leaves; ++i) {
    leaf_b[i] = cand.para_value(tree.leaf(i), M[leaves + i], Ap);
    mean_b += leaf_b[i];
  }
  mean_b /= static_cast<double>(leaves);

  telescope(
      tree, mod,
      [&](int sign, std::size_t h) {
        if (h == 1) return sign > 0 ? bp : bm;
        const auto& MM = sign > 0 ? mod.M_plus : mod.M_minus;
        return cand.para_value(mod.X(sign)[h], MM[h], Ap);
      },
      sink, rep, leaf_b);

  const double drop = b0 - mean_b;
  rep.final_diff_margin = drop / (2.0 * gamma) - ptree.d() * std::abs(x0.f) * dg;
  const double mg = mean_abs_diff(tree, false);
  rep.move_margin = 6.0 * dg_lo - mg;

  rep.lhs = ptree.d() * std::abs(x0.f) * mg;
  rep.rhs = rep.constant / gamma * drop;
  rep.margin = rep.rhs - rep.lhs;
  rep.candidate_violations = sink.count;
  return rep;
}

double quadratic_strong_margin(const MartingaleTree& tree, const BellmanCandidate& cand) {
  const double Ap = 4.5 * tree.A();
  const std::size_t leaves = tree.leaf_count();
  const BellmanPoint& x0 = tree.root();
  double mean_b = 0.0, vf = 0.0, vg = 0.0;
  for (std::size_t i = 0; i < leaves; ++i) {
    const BellmanPoint& x = tree.leaf(i);
    mean_b += cand.value(x, Ap);
    vf += (x.f - x0.f) * (x.f - x0.f);
    vg += (x.g - x0.g) * (x.g - x0.g);
  }
  const double inv = 1.0 / static_cast<double>(leaves);
  return cand.value(x0, Ap) - mean_b * inv - 4.0 * cand.gamma * std::sqrt(vf * inv) * std::sqrt(vg * inv);
}

}  // namespace haarlab
