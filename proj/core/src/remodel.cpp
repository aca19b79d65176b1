#include "haarlab/remodel.hpp"

#include <cmath>
#include <string>

#include "haarlab/error.hpp"
#include "haarlab/random.hpp"
#include "haarlab/weights.hpp"

namespace haarlab {

namespace {

void check_dims(int d, int cube_depth) {
  if (d < 1 || d > kMaxCubeDimension) {
    throw ValidationError("cube dimension must be in [1, " + std::to_string(kMaxCubeDimension) + "]");
  }
  if (cube_depth < 1 || d * cube_depth > DyadicGrid::kMaxDepth) {
    throw ValidationError("cube depth " + std::to_string(cube_depth) + " is out of range for d = " +
                          std::to_string(d));
  }
}

// Row-major index of a cube at `level` given its integer coordinates.
std::size_t row_major(const std::array<std::int64_t, kMaxCubeDimension>& idx, int d, int level) {
  std::size_t r = 0;
  for (int i = 0; i < d; ++i) r = (r << level) | static_cast<std::size_t>(idx[i]);
  return r;
}

std::array<std::int64_t, kMaxCubeDimension> unravel(std::size_t r, int d, int level) {
  std::array<std::int64_t, kMaxCubeDimension> idx{};
  const std::size_t mask = (std::size_t{1} << level) - 1;
  for (int i = d - 1; i >= 0; --i) {
    idx[i] = static_cast<std::int64_t>(r & mask);
    r >>= level;
  }
  return idx;
}

// Averages of `v` over every genuine cube, one row-major array per level.
std::vector<std::vector<double>> cube_level_averages(int d, int depth, const std::vector<double>& v) {
  std::vector<std::vector<double>> levels(static_cast<std::size_t>(depth) + 1);
  levels[depth] = v;
  for (int l = depth - 1; l >= 0; --l) {
    const std::size_t count = std::size_t{1} << (d * l);
    levels[l].assign(count, 0.0);
    const auto& fine = levels[l + 1];
    for (std::size_t r = 0; r < fine.size(); ++r) {
      auto idx = unravel(r, d, l + 1);
      for (int i = 0; i < d; ++i) idx[i] >>= 1;
      levels[l][row_major(idx, d, l)] += fine[r];
    }
    const double inv = 1.0 / static_cast<double>(std::size_t{1} << d);
    for (double& x : levels[l]) x *= inv;
  }
  return levels;
}

}  // namespace

double CubeNode::measure() const noexcept { return std::ldexp(1.0, -(dim * level + stage)); }

std::int64_t CubeNode::side(int i, int cube_depth) const noexcept {
  const std::int64_t full = std::int64_t{1} << (cube_depth - level);
  return i < stage ? full / 2 : full;
}

double CubeFunction::average(const CubeNode& node) const {
  if (node.dim != dim) throw GridError("cube node and function have different dimensions");
  std::array<std::int64_t, kMaxCubeDimension> side{};
  std::size_t count = 1;
  for (int i = 0; i < dim; ++i) {
    side[i] = node.side(i, cube_depth);
    if (side[i] < 1 || node.corner[i] < 0 ||
        node.corner[i] + side[i] > static_cast<std::int64_t>(cells_per_side())) {
      throw GridError("cube node lies outside the function's cells");
    }
    count *= static_cast<std::size_t>(side[i]);
  }
  double s = 0.0;
  std::array<std::int64_t, kMaxCubeDimension> off{};
  for (std::size_t k = 0; k < count; ++k) {
    std::array<std::int64_t, kMaxCubeDimension> cell{};
    for (int i = 0; i < dim; ++i) cell[i] = node.corner[i] + off[i];
    s += values[row_major(cell, dim, cube_depth)];
    for (int i = dim - 1; i >= 0; --i) {
      if (++off[i] < side[i]) break;
      off[i] = 0;
    }
  }
  return s / static_cast<double>(count);
}

const CubeNode& RemodelMap::box(const DyadicNode& interval) const {
  grid_.check(interval);
  return boxes_[interval.heap_index()];
}

bool RemodelMap::flipped(const DyadicNode& interval) const {
  grid_.check(interval);
  if (grid_.is_leaf(interval)) throw GridError("leaves are not split");
  return flip_[interval.heap_index()] != 0;
}

DyadicNode RemodelMap::interval(const CubeNode& b) const {
  if (b.dim != dim_ || b.stage < 0 || b.stage >= dim_ || b.level < 0) throw GridError("box is not in the cube tree");
  const int target = dim_ * b.level + b.stage;
  if (target > grid_.depth()) throw GridError("box is finer than the cube tree");
  std::size_t h = 1;
  for (int step = 0; step < target; ++step) {
    const CubeNode& cur = boxes_[h];
    const int s = cur.stage;
    const std::int64_t half = cur.side(s, cube_depth_) / 2;
    const bool upper = b.corner[s] >= cur.corner[s] + half;
    const bool left_is_upper = flip_[h] != 0;
    h = 2 * h + (upper == left_is_upper ? 0 : 1);
  }
  if (!(boxes_[h] == b)) throw GridError("box is not aligned with the cube tree");
  return DyadicNode::from_heap_index(h);
}

RemodelMap build_phi(int d, int cube_depth, std::uint64_t seed) {
  check_dims(d, cube_depth);
  RemodelMap map;
  map.dim_ = d;
  map.cube_depth_ = cube_depth;
  map.grid_ = DyadicGrid(d * cube_depth);
  const std::size_t slots = map.grid_.node_slots();
  const std::size_t leaves = map.grid_.leaf_count();
  map.boxes_.assign(slots, CubeNode{});
  map.flip_.assign(leaves, 0);
  map.boxes_[1].dim = d;
  Rng rng(seed);
  for (std::size_t h = 1; h < leaves; ++h) {
    const CubeNode& b = map.boxes_[h];
    const int s = b.stage;
    CubeNode lower = b;
    lower.stage = s + 1;
    if (lower.stage == d) {
      lower.stage = 0;
      lower.level += 1;
    }
    CubeNode upper = lower;
    upper.corner[s] += b.side(s, cube_depth) / 2;
    const bool flip = d >= 2 && rng.coin();
    map.flip_[h] = flip ? 1 : 0;
    map.boxes_[2 * h] = flip ? upper : lower;
    map.boxes_[2 * h + 1] = flip ? lower : upper;
  }
  map.cell_of_leaf_.resize(leaves);
  map.leaf_of_cell_.resize(leaves);
  for (std::size_t j = 0; j < leaves; ++j) {
    const std::size_t c = row_major(map.boxes_[leaves + j].corner, d, cube_depth);
    map.cell_of_leaf_[j] = c;
    map.leaf_of_cell_[c] = j;
  }
  return map;
}

StepFunction transfer_function(const RemodelMap& map, const CubeFunction& f) {
  if (f.dim != map.dim() || f.cube_depth != map.cube_depth() || f.values.size() != map.grid().leaf_count()) {
    throw GridError("cube function resolution does not match the remodel map");
  }
  std::vector<double> v(f.values.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = f.values[map.cell_of_leaf(j)];
  return StepFunction(map.grid(), std::move(v));
}

CubeFunction transfer_back(const RemodelMap& map, const StepFunction& g) {
  if (!(g.grid() == map.grid())) throw GridError("step function resolution does not match the remodel map");
  CubeFunction f{map.dim(), map.cube_depth(), std::vector<double>(g.size())};
  for (std::size_t j = 0; j < g.size(); ++j) f.values[map.cell_of_leaf(j)] = g[j];
  return f;
}

CubeA2 cube_a2_norm(const CubeFunction& w) {
  check_dims(w.dim, w.cube_depth);
  std::vector<double> inv(w.values.size());
  for (std::size_t c = 0; c < inv.size(); ++c) {
    if (!(w.values[c] > 0.0) || !std::isfinite(w.values[c])) {
      throw ValidationError("weight must be strictly positive; cell " + std::to_string(c));
    }
    inv[c] = 1.0 / w.values[c];
  }
  const auto aw = cube_level_averages(w.dim, w.cube_depth, w.values);
  const auto ai = cube_level_averages(w.dim, w.cube_depth, inv);
  CubeA2 best{0.0, CubeNode{w.dim, 0, 0, {}}};
  for (int l = 0; l <= w.cube_depth; ++l) {
    for (std::size_t r = 0; r < aw[l].size(); ++r) {
      const double p = aw[l][r] * ai[l][r];
      if (p > best.a2_norm) {
        best.a2_norm = p;
        auto idx = unravel(r, w.dim, l);
        for (int i = 0; i < w.dim; ++i) idx[i] <<= (w.cube_depth - l);
        best.witness = CubeNode{w.dim, l, 0, idx};
      }
    }
  }
  return best;
}

A2Inflation a2_inflation(const RemodelMap& map, const CubeFunction& w) {
  A2Inflation out;
  out.a2_before = cube_a2_norm(w).a2_norm;
  const A2Report after = a2_norm(Weight(transfer_function(map, w)));
  out.a2_after = after.a2_norm;
  out.witness = after.witness;
  out.ratio = out.a2_after / out.a2_before;
  const double bound = std::ldexp(1.0, 2 * (map.dim() - 1));
  if (out.ratio > bound * (1.0 + 1e-12)) {
    throw ContractViolation("A2 inflation " + std::to_string(out.ratio) + " exceeds " + std::to_string(bound) +
                            " at interval [" + std::to_string(out.witness.level()) + "," +
                            std::to_string(out.witness.position()) + "]");
  }
  return out;
}

CubeFunction cube_cascade_weight(int d, int cube_depth, double delta, std::uint64_t seed) {
  check_dims(d, cube_depth);
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ValidationError("cascade delta must be >= 0");
  Rng rng(seed);
  std::vector<double> log_w(std::size_t{1} << (d * cube_depth), 0.0);
  std::vector<double> parent{0.0};
  for (int l = 1; l <= cube_depth; ++l) {
    std::vector<double> cur(std::size_t{1} << (d * l));
    for (std::size_t r = 0; r < cur.size(); ++r) {
      auto idx = unravel(r, d, l);
      for (int i = 0; i < d; ++i) idx[i] >>= 1;
      cur[r] = parent[row_major(idx, d, l - 1)] + delta * rng.sign();
    }
    parent = std::move(cur);
  }
  CubeFunction w{d, cube_depth, std::move(parent)};
  for (double& x : w.values) x = std::exp(x);
  return w;
}

CubeShiftSpec CubeShiftSpec::random(int d, int cube_depth, int n, Rng& rng) {
  check_dims(d, cube_depth);
  if (n < 1 || n > cube_depth) throw ValidationError("cube shift complexity out of range");
  CubeShiftSpec spec{d, cube_depth, n, {}};
  const std::size_t blocks = spec.block_count();
  for (int l = 0; l + n <= cube_depth; ++l) {
    const double bound = std::ldexp(1.0, d * l);  // |Q|^{-1}
    for (std::size_t r = 0; r < (std::size_t{1} << (d * l)); ++r) {
      Entry e{l, unravel(r, d, l), std::vector<double>(blocks * blocks)};
      for (double& k : e.kernel) k = bound * rng.sign();
      spec.entries.push_back(std::move(e));
    }
  }
  return spec;
}

CubeFunction apply_cube_shift(const CubeShiftSpec& spec, const CubeFunction& f) {
  const int d = spec.dim;
  const int depth = spec.cube_depth;
  const int n = spec.complexity;
  if (f.dim != d || f.cube_depth != depth) throw GridError("cube shift and function resolutions differ");
  const auto avg = cube_level_averages(d, depth, f.values);
  std::vector<std::vector<double>> inc(static_cast<std::size_t>(depth) + 1);
  for (int l = 0; l <= depth; ++l) inc[l].assign(std::size_t{1} << (d * l), 0.0);

  const std::size_t blocks = spec.block_count();
  std::vector<double> phi(blocks), psi(blocks);
  std::vector<std::size_t> where(blocks);
  for (const auto& e : spec.entries) {
    if (e.level + n > depth) throw ValidationError("cube shift entry too deep");
    const double q_avg = avg[e.level][row_major(e.index, d, e.level)];
    for (std::size_t b = 0; b < blocks; ++b) {
      const auto local = unravel(b, d, n);
      std::array<std::int64_t, kMaxCubeDimension> idx{};
      for (int i = 0; i < d; ++i) idx[i] = (e.index[i] << n) + local[i];
      where[b] = row_major(idx, d, e.level + n);
      phi[b] = avg[e.level + n][where[b]] - q_avg;
    }
    const double scale = std::ldexp(1.0, -d * (e.level + n));  // |Q| 2^{-dn}
    double mean = 0.0;
    for (std::size_t i = 0; i < blocks; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < blocks; ++j) s += e.kernel[i * blocks + j] * phi[j];
      psi[i] = s * scale;
      mean += psi[i];
    }
    mean /= static_cast<double>(blocks);
    for (std::size_t i = 0; i < blocks; ++i) inc[e.level + n][where[i]] += psi[i] - mean;
  }
  for (int l = 1; l <= depth; ++l) {
    for (std::size_t r = 0; r < inc[l].size(); ++r) {
      auto idx = unravel(r, d, l);
      for (int i = 0; i < d; ++i) idx[i] >>= 1;
      inc[l][r] += inc[l - 1][row_major(idx, d, l - 1)];
    }
  }
  return CubeFunction{d, depth, std::move(inc[depth])};
}

ops::HaarShiftSpec remodel_shift(const RemodelMap& map, const CubeShiftSpec& spec) {
  if (spec.dim != map.dim() || spec.cube_depth != map.cube_depth()) {
    throw GridError("cube shift and remodel map resolutions differ");
  }
  const int d = spec.dim;
  const int n = spec.complexity;
  const std::size_t blocks = spec.block_count();
  std::vector<ops::HaarShiftSpec::Entry> out;
  std::vector<std::size_t> perm(blocks);
  for (const auto& e : spec.entries) {
    CubeNode q{d, e.level, 0, {}};
    for (int i = 0; i < d; ++i) q.corner[i] = e.index[i] << (spec.cube_depth - e.level);
    const DyadicNode j = map.interval(q);
    const int child_shift = spec.cube_depth - e.level - n;
    for (std::size_t b = 0; b < blocks; ++b) {
      const DyadicNode sub(j.level() + d * n, (j.position() << (d * n)) + static_cast<std::int64_t>(b));
      const CubeNode& c = map.box(sub);
      std::array<std::int64_t, kMaxCubeDimension> local{};
      for (int i = 0; i < d; ++i) local[i] = (c.corner[i] - q.corner[i]) >> child_shift;
      perm[b] = row_major(local, d, n);
    }
    std::vector<double> kernel(blocks * blocks);
    for (std::size_t bi = 0; bi < blocks; ++bi)
      for (std::size_t bj = 0; bj < blocks; ++bj) kernel[bi * blocks + bj] = e.kernel[perm[bi] * blocks + perm[bj]];
    out.push_back({j, std::move(kernel)});
  }
  return ops::HaarShiftSpec(map.grid(), n * d, std::move(out));
}

}  // namespace haarlab
