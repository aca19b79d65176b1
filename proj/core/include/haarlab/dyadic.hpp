#pragma once

// Finite-depth dyadic lattice on [0,1): nodes, grids, leaf-valued step
// functions, Haar vectors, averaging and martingale difference operators.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace haarlab {

/// Dyadic interval [pos 2^-level, (pos+1) 2^-level).
///
/// Nodes also have a heap index 2^level + position (root = 1, children of h
/// are 2h and 2h+1), which the library uses for flat per-node arrays.
class DyadicNode {
 public:
  /// Throws GridError unless 0 <= position < 2^level and level <= 62.
  DyadicNode(int level, std::int64_t position);

  static DyadicNode root() noexcept { return DyadicNode(); }
  static DyadicNode from_heap_index(std::size_t h);

  int level() const noexcept { return level_; }
  std::int64_t position() const noexcept { return position_; }
  std::size_t heap_index() const noexcept {
    return (std::size_t{1} << level_) + static_cast<std::size_t>(position_);
  }

  double length() const noexcept;
  double left() const noexcept { return static_cast<double>(position_) * length(); }

  DyadicNode parent() const;
  /// which = 0 for the left half, 1 for the right half.
  DyadicNode child(int which) const;
  DyadicNode ancestor(int level) const;

  /// True iff `other` is a (not necessarily strict) descendant of this node.
  bool contains(const DyadicNode& other) const noexcept;

  auto operator<=>(const DyadicNode&) const = default;

 private:
  DyadicNode() = default;
  int level_ = 0;
  std::int64_t position_ = 0;
};

/// chld_k(node), left to right. chld_0(node) = {node}. No grid bound.
std::vector<DyadicNode> children(const DyadicNode& node, int k);

/// Truncation of the dyadic lattice at depth N: the leaves are the 2^N
/// intervals of length 2^-N.
class DyadicGrid {
 public:
  static constexpr int kDefaultDepth = 10;
  static constexpr int kMaxDepth = 26;

  explicit DyadicGrid(int depth = kDefaultDepth);

  int depth() const noexcept { return depth_; }
  std::size_t leaf_count() const noexcept { return std::size_t{1} << depth_; }
  double leaf_measure() const noexcept;
  /// Number of heap slots needed for all nodes (index 0 unused).
  std::size_t node_slots() const noexcept { return std::size_t{2} << depth_; }
  std::size_t internal_count() const noexcept { return leaf_count() - 1; }

  bool contains(const DyadicNode& node) const noexcept { return node.level() <= depth_; }
  /// Throws GridError if the node lies below the leaves.
  void check(const DyadicNode& node) const;
  bool is_leaf(const DyadicNode& node) const noexcept { return node.level() == depth_; }

  /// Half-open range of leaf indices under `node`.
  std::pair<std::size_t, std::size_t> leaf_range(const DyadicNode& node) const;
  DyadicNode leaf(std::size_t j) const;

  /// chld_k(node), bounded by the grid: throws GridError when
  /// node.level() + k exceeds the depth.
  std::vector<DyadicNode> children(const DyadicNode& node, int k) const;

  bool operator==(const DyadicGrid&) const = default;

 private:
  int depth_;
};

/// Leaf-valued function on a DyadicGrid, leaves ordered left to right.
class StepFunction {
 public:
  StepFunction(DyadicGrid grid, std::vector<double> values);

  static StepFunction zero(DyadicGrid grid);
  static StepFunction constant(DyadicGrid grid, double c);
  static StepFunction indicator(DyadicGrid grid, const DyadicNode& node);

  const DyadicGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }

  StepFunction operator+(const StepFunction& other) const;
  StepFunction operator-(const StepFunction& other) const;
  StepFunction operator*(double s) const;
  friend StepFunction operator*(double s, const StepFunction& f) { return f * s; }

  double max_abs() const noexcept;

 private:
  DyadicGrid grid_;
  std::vector<double> values_;
};

/// Throws GridError if the two functions live on different grids.
void require_same_grid(const StepFunction& a, const StepFunction& b);

/// <f>_I, the mean of the leaf values under `node`.
double average(const StepFunction& f, const DyadicNode& node);

/// Averages of f over every node, heap-indexed (slot 0 unused).
std::vector<double> all_averages(const StepFunction& f);

/// L^2 inner product with Lebesgue (leaf) measure.
double inner(const StepFunction& f, const StepFunction& g);
double l2_norm(const StepFunction& f);

/// Delta_I f = -E_I f + sum over children J of E_J f. Throws GridError for leaves.
StepFunction mart_diff(const StepFunction& f, const DyadicNode& node);

/// Delta^n_Q f = sum_{k<n} sum_{J in chld_k(Q)} Delta_J f: the projection onto
/// functions supported on Q, constant on chld_n(Q), with zero mean.
StepFunction mart_diff_n(const StepFunction& f, const DyadicNode& node, int n);

/// Block values of Delta^n_Q f: entry j is <f>_{J_j} - <f>_Q for the j-th
/// interval J_j of chld_n(Q). `averages` must come from all_averages(f).
std::vector<double> mart_diff_n_blocks(const DyadicGrid& grid, std::span<const double> averages,
                                       const DyadicNode& node, int n);

/// Generic Haar function: supported on `node`, constant on its two children,
/// mean zero.
class HaarVector {
 public:
  /// Coefficients are the values on the left and right child. Throws
  /// ValidationError unless they sum to zero (relative 1e-12). With
  /// `unit_sup` the vector is rescaled to sup-norm one.
  HaarVector(DyadicNode node, std::vector<double> coefficients, bool unit_sup = false);

  /// +1 on the left half, -1 on the right half.
  static HaarVector standard(const DyadicNode& node);
  /// |I|^{-1/2}(1_{I_1} - 1_{I_2}).
  static HaarVector l2_normalized(const DyadicNode& node);

  const DyadicNode& node() const noexcept { return node_; }
  std::span<const double> coefficients() const noexcept { return coefficients_; }
  double sup_norm() const noexcept;
  HaarVector scaled(double s) const;

  /// (f, h) = integral of f h.
  double pair(const StepFunction& f) const;
  double pair_with_averages(std::span<const double> averages) const;
  StepFunction to_step_function(const DyadicGrid& grid) const;

 private:
  DyadicNode node_;
  std::vector<double> coefficients_;
};

/// Orthogonal Haar decomposition f = <f>_[0,1) + sum_I c_I h_I with h_I the
/// L^2-normalized standard Haar function.
struct HaarExpansion {
  DyadicGrid grid;
  double root_average = 0.0;
  /// c_I = (f, h_I), heap-indexed over internal nodes; slot 0 unused.
  std::vector<double> detail;

  double coefficient(const DyadicNode& node) const;
};

HaarExpansion haar_expand(const StepFunction& f);
StepFunction reconstruct(const HaarExpansion& expansion);

/// Builds the step function whose value on leaf j is the sum of
/// `node_increments[h]` over all nodes h containing j (heap-indexed).
StepFunction push_down(const DyadicGrid& grid, std::vector<double> node_increments);

}  // namespace haarlab
