#include "haarlab/dyadic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "haarlab/error.hpp"

namespace haarlab {

DyadicNode::DyadicNode(int level, std::int64_t position) : level_(level), position_(position) {
  if (level < 0 || level > 62) throw GridError("dyadic level out of range: " + std::to_string(level));
  if (position < 0 || position >= (std::int64_t{1} << level)) {
    throw GridError("dyadic position " + std::to_string(position) + " out of range at level " +
                    std::to_string(level));
  }
}

DyadicNode DyadicNode::from_heap_index(std::size_t h) {
  if (h == 0) throw GridError("heap index 0 does not name a node");
  const int level = static_cast<int>(std::bit_width(h)) - 1;
  return DyadicNode(level, static_cast<std::int64_t>(h - (std::size_t{1} << level)));
}

double DyadicNode::length() const noexcept { return std::ldexp(1.0, -level_); }

DyadicNode DyadicNode::parent() const {
  if (level_ == 0) throw GridError("the root interval has no parent");
  return DyadicNode(level_ - 1, position_ >> 1);
}

DyadicNode DyadicNode::child(int which) const {
  return DyadicNode(level_ + 1, 2 * position_ + (which != 0 ? 1 : 0));
}

DyadicNode DyadicNode::ancestor(int level) const {
  if (level < 0 || level > level_) throw GridError("ancestor level out of range");
  return DyadicNode(level, position_ >> (level_ - level));
}

bool DyadicNode::contains(const DyadicNode& other) const noexcept {
  if (other.level_ < level_) return false;
  return (other.position_ >> (other.level_ - level_)) == position_;
}

std::vector<DyadicNode> children(const DyadicNode& node, int k) {
  if (k < 0) throw GridError("negative child order");
  std::vector<DyadicNode> out;
  const std::int64_t count = std::int64_t{1} << k;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t j = 0; j < count; ++j) {
    out.emplace_back(node.level() + k, (node.position() << k) + j);
  }
  return out;
}

DyadicGrid::DyadicGrid(int depth) : depth_(depth) {
  if (depth < 1 || depth > kMaxDepth) {
    throw GridError("grid depth must lie in [1, " + std::to_string(kMaxDepth) +
                    "], got " + std::to_string(depth));
  }
}

double DyadicGrid::leaf_measure() const noexcept { return std::ldexp(1.0, -depth_); }

void DyadicGrid::check(const DyadicNode& node) const {
  if (!contains(node)) {
    throw GridError("node at level " + std::to_string(node.level()) +
                    " lies below a grid of depth " + std::to_string(depth_));
  }
}

std::pair<std::size_t, std::size_t> DyadicGrid::leaf_range(const DyadicNode& node) const {
  check(node);
  const int shift = depth_ - node.level();
  const auto first = static_cast<std::size_t>(node.position()) << shift;
  return {first, first + (std::size_t{1} << shift)};
}

DyadicNode DyadicGrid::leaf(std::size_t j) const {
  if (j >= leaf_count()) throw GridError("leaf index out of range");
  return DyadicNode(depth_, static_cast<std::int64_t>(j));
}

std::vector<DyadicNode> DyadicGrid::children(const DyadicNode& node, int k) const {
  if (k < 0 || node.level() + k > depth_) {
    throw GridError("chld_" + std::to_string(k) + " of a level-" + std::to_string(node.level()) +
                    " node leaves a grid of depth " + std::to_string(depth_));
  }
  return haarlab::children(node, k);
}

StepFunction::StepFunction(DyadicGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.leaf_count()) {
    throw GridError("step function has " + std::to_string(values_.size()) +
                    " values, grid has " + std::to_string(grid_.leaf_count()) + " leaves");
  }
}

StepFunction StepFunction::zero(DyadicGrid grid) { return constant(grid, 0.0); }

StepFunction StepFunction::constant(DyadicGrid grid, double c) {
  return StepFunction(grid, std::vector<double>(grid.leaf_count(), c));
}

StepFunction StepFunction::indicator(DyadicGrid grid, const DyadicNode& node) {
  std::vector<double> v(grid.leaf_count(), 0.0);
  const auto [a, b] = grid.leaf_range(node);
  std::fill(v.begin() + static_cast<std::ptrdiff_t>(a), v.begin() + static_cast<std::ptrdiff_t>(b), 1.0);
  return StepFunction(grid, std::move(v));
}

StepFunction StepFunction::operator+(const StepFunction& other) const {
  require_same_grid(*this, other);
  std::vector<double> v(values_);
  for (std::size_t j = 0; j < v.size(); ++j) v[j] += other.values_[j];
  return StepFunction(grid_, std::move(v));
}

StepFunction StepFunction::operator-(const StepFunction& other) const {
  require_same_grid(*this, other);
  std::vector<double> v(values_);
  for (std::size_t j = 0; j < v.size(); ++j) v[j] -= other.values_[j];
  return StepFunction(grid_, std::move(v));
}

StepFunction StepFunction::operator*(double s) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= s;
  return StepFunction(grid_, std::move(v));
}

double StepFunction::max_abs() const noexcept {
  double m = 0.0;
  for (double x : values_) m = std::max(m, std::abs(x));
  return m;
}

void require_same_grid(const StepFunction& a, const StepFunction& b) {
  if (!(a.grid() == b.grid())) {
    throw GridError("grid mismatch: depth " + std::to_string(a.grid().depth()) + " vs " +
                    std::to_string(b.grid().depth()));
  }
}

double average(const StepFunction& f, const DyadicNode& node) {
  const auto [a, b] = f.grid().leaf_range(node);
  double s = 0.0;
  for (std::size_t j = a; j < b; ++j) s += f[j];
  return s / static_cast<double>(b - a);
}

std::vector<double> all_averages(const StepFunction& f) {
  const std::size_t leaves = f.grid().leaf_count();
  std::vector<double> avg(2 * leaves, 0.0);
  std::copy(f.values().begin(), f.values().end(), avg.begin() + static_cast<std::ptrdiff_t>(leaves));
  for (std::size_t h = leaves - 1; h >= 1; --h) avg[h] = 0.5 * (avg[2 * h] + avg[2 * h + 1]);
  return avg;
}

double inner(const StepFunction& f, const StepFunction& g) {
  require_same_grid(f, g);
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += f[j] * g[j];
  return s * f.grid().leaf_measure();
}

double l2_norm(const StepFunction& f) { return std::sqrt(inner(f, f)); }

StepFunction mart_diff(const StepFunction& f, const DyadicNode& node) {
  if (node.level() >= f.grid().depth()) {
    throw GridError("martingale difference is undefined on a leaf");
  }
  return mart_diff_n(f, node, 1);
}

std::vector<double> mart_diff_n_blocks(const DyadicGrid& grid, std::span<const double> averages,
                                       const DyadicNode& node, int n) {
  if (n < 0 || node.level() + n > grid.depth()) {
    throw GridError("Delta^" + std::to_string(n) + " at level " + std::to_string(node.level()) +
                    " exceeds grid depth " + std::to_string(grid.depth()));
  }
  const std::size_t first = node.heap_index() << n;
  const std::size_t count = std::size_t{1} << n;
  const double mean = averages[node.heap_index()];
  std::vector<double> blocks(count);
  for (std::size_t j = 0; j < count; ++j) blocks[j] = averages[first + j] - mean;
  return blocks;
}

StepFunction mart_diff_n(const StepFunction& f, const DyadicNode& node, int n) {
  const DyadicGrid& grid = f.grid();
  const auto avg = all_averages(f);
  const auto blocks = mart_diff_n_blocks(grid, avg, node, n);
  std::vector<double> out(grid.leaf_count(), 0.0);
  if (n == 0) return StepFunction(grid, std::move(out));
  const std::size_t width = std::size_t{1} << (grid.depth() - node.level() - n);
  const std::size_t first = grid.leaf_range(node).first;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(first + b * width), width, blocks[b]);
  }
  return StepFunction(grid, std::move(out));
}

HaarVector::HaarVector(DyadicNode node, std::vector<double> coefficients, bool unit_sup)
    : node_(node), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != 2) throw ValidationError("a Haar vector on an interval has 2 coefficients");
  const double scale = std::max(std::abs(coefficients_[0]), std::abs(coefficients_[1]));
  if (std::abs(coefficients_[0] + coefficients_[1]) > 1e-12 * scale) {
    throw ValidationError("Haar vector coefficients must sum to zero");
  }
  if (unit_sup) {
    if (scale == 0.0) throw ValidationError("cannot normalize a zero Haar vector");
    for (double& c : coefficients_) c /= scale;
  }
}

HaarVector HaarVector::standard(const DyadicNode& node) { return HaarVector(node, {1.0, -1.0}); }

HaarVector HaarVector::l2_normalized(const DyadicNode& node) {
  const double s = 1.0 / std::sqrt(node.length());
  return HaarVector(node, {s, -s});
}

double HaarVector::sup_norm() const noexcept {
  return std::max(std::abs(coefficients_[0]), std::abs(coefficients_[1]));
}

HaarVector HaarVector::scaled(double s) const {
  return HaarVector(node_, {coefficients_[0] * s, coefficients_[1] * s});
}

double HaarVector::pair_with_averages(std::span<const double> averages) const {
  const std::size_t h = node_.heap_index();
  const double half = 0.5 * node_.length();
  return half * (coefficients_[0] * averages[2 * h] + coefficients_[1] * averages[2 * h + 1]);
}

double HaarVector::pair(const StepFunction& f) const {
  f.grid().check(node_.child(0));
  const double half = 0.5 * node_.length();
  return half * (coefficients_[0] * average(f, node_.child(0)) +
                 coefficients_[1] * average(f, node_.child(1)));
}

StepFunction HaarVector::to_step_function(const DyadicGrid& grid) const {
  grid.check(node_.child(0));
  std::vector<double> v(grid.leaf_count(), 0.0);
  for (int c = 0; c < 2; ++c) {
    const auto [a, b] = grid.leaf_range(node_.child(c));
    for (std::size_t j = a; j < b; ++j) v[j] = coefficients_[static_cast<std::size_t>(c)];
  }
  return StepFunction(grid, std::move(v));
}

double HaarExpansion::coefficient(const DyadicNode& node) const {
  if (node.level() >= grid.depth()) throw GridError("leaves carry no Haar coefficient");
  return detail[node.heap_index()];
}

HaarExpansion haar_expand(const StepFunction& f) {
  const DyadicGrid& grid = f.grid();
  const auto avg = all_averages(f);
  HaarExpansion e{grid, avg[1], std::vector<double>(grid.leaf_count(), 0.0)};
  for (std::size_t h = 1; h < grid.leaf_count(); ++h) {
    const int level = static_cast<int>(std::bit_width(h)) - 1;
    const double half_sqrt = 0.5 * std::sqrt(std::ldexp(1.0, -level));
    e.detail[h] = half_sqrt * (avg[2 * h] - avg[2 * h + 1]);
  }
  return e;
}

StepFunction reconstruct(const HaarExpansion& e) {
  const DyadicGrid& grid = e.grid;
  if (e.detail.size() != grid.leaf_count()) throw GridError("expansion size does not match grid");
  // Top-down: the children of h have averages avg(h) +- c_h |I|^{-1/2}.
  std::vector<double> avg(grid.node_slots(), 0.0);
  avg[1] = e.root_average;
  for (std::size_t h = 1; h < grid.leaf_count(); ++h) {
    const int level = static_cast<int>(std::bit_width(h)) - 1;
    const double step = e.detail[h] / std::sqrt(std::ldexp(1.0, -level));
    avg[2 * h] = avg[h] + step;
    avg[2 * h + 1] = avg[h] - step;
  }
  return StepFunction(grid, std::vector<double>(avg.begin() + static_cast<std::ptrdiff_t>(grid.leaf_count()),
                                                avg.end()));
}

StepFunction push_down(const DyadicGrid& grid, std::vector<double> inc) {
  if (inc.size() != grid.node_slots()) throw GridError("increment array does not match grid");
  for (std::size_t h = 2; h < inc.size(); ++h) inc[h] += inc[h / 2];
  return StepFunction(grid, std::vector<double>(inc.begin() + static_cast<std::ptrdiff_t>(grid.leaf_count()),
                                                inc.end()));
}

}  // namespace haarlab
