#pragma once

// Remodeling of d-dimensional dyadic cubes onto the line. Each cube is split
// one coordinate at a time; the intermediate boxes ("almost children") and
// the cubes all become dyadic intervals of the same measure.

#include <array>
#include <cstdint>
#include <vector>

#include "haarlab/dyadic.hpp"
#include "haarlab/operators.hpp"

namespace haarlab {

constexpr int kMaxCubeDimension = 8;

/// Box obtained from a dyadic cube of side 2^-level by halving its first
/// `stage` coordinates. stage = 0 is a genuine cube. `corner` holds the
/// lower corner in units of the finest cube side 2^-cube_depth.
struct CubeNode {
  int dim = 1;
  int level = 0;
  int stage = 0;
  std::array<std::int64_t, kMaxCubeDimension> corner{};

  bool is_cube() const noexcept { return stage == 0; }
  /// Measure 2^{-(d level + stage)}.
  double measure() const noexcept;
  /// Side length of coordinate i in finest-cell units for a map of the given cube depth.
  std::int64_t side(int i, int cube_depth) const noexcept;
  bool operator==(const CubeNode&) const = default;
};

/// Function on the 2^{d D} finest cells, row-major with coordinate 0 slowest.
struct CubeFunction {
  int dim = 1;
  int cube_depth = 1;
  std::vector<double> values;

  std::size_t cells_per_side() const noexcept { return std::size_t{1} << cube_depth; }
  /// Mean over the cells of a node.
  double average(const CubeNode& node) const;
};

/// Bijection between boxes of the cube tree and intervals of a dyadic grid
/// of depth d * cube_depth, with |Phi(R)| = |R| and nesting preserved.
class RemodelMap {
 public:
  int dim() const noexcept { return dim_; }
  int cube_depth() const noexcept { return cube_depth_; }
  const DyadicGrid& grid() const noexcept { return grid_; }

  /// Phi^{-1} of an interval of the grid.
  const CubeNode& box(const DyadicNode& interval) const;
  /// Phi of a box; throws GridError if the box is not in the tree.
  DyadicNode interval(const CubeNode& box) const;
  /// Row-major cell under interval leaf j.
  std::size_t cell_of_leaf(std::size_t j) const { return cell_of_leaf_.at(j); }
  std::size_t leaf_of_cell(std::size_t c) const { return leaf_of_cell_.at(c); }
  /// Whether the left child of an interval carries the lower half of the split coordinate.
  bool flipped(const DyadicNode& interval) const;

 private:
  friend RemodelMap build_phi(int d, int cube_depth, std::uint64_t seed);
  int dim_ = 1;
  int cube_depth_ = 1;
  DyadicGrid grid_{1};
  std::vector<CubeNode> boxes_;  // heap-indexed by interval
  std::vector<std::uint8_t> flip_;
  std::vector<std::size_t> cell_of_leaf_;
  std::vector<std::size_t> leaf_of_cell_;
};

/// Splits coordinates in order 0..d-1 at each level. For d >= 2 the side of
/// each split that goes to the left child is chosen by a seeded coin; d = 1
/// is the identity.
RemodelMap build_phi(int d, int cube_depth, std::uint64_t seed);

/// Leaf permutation carrying cube averages to interval averages.
StepFunction transfer_function(const RemodelMap& map, const CubeFunction& f);
CubeFunction transfer_back(const RemodelMap& map, const StepFunction& g);

struct CubeA2 {
  double a2_norm = 1.0;
  CubeNode witness;
};
/// sup over genuine cubes (finest cells included) of <w>_Q <w^{-1}>_Q.
CubeA2 cube_a2_norm(const CubeFunction& w);

struct A2Inflation {
  double a2_before = 1.0;
  double a2_after = 1.0;
  double ratio = 1.0;
  DyadicNode witness = DyadicNode::root();
};
/// Throws ContractViolation (naming the witness interval) if the ratio
/// exceeds 4^{d-1}. The weight must be strictly positive.
A2Inflation a2_inflation(const RemodelMap& map, const CubeFunction& w);

/// log w gets an independent +-delta on every cube edge (2^d children).
CubeFunction cube_cascade_weight(int d, int cube_depth, double delta, std::uint64_t seed);

/// d-dimensional Haar shift of complexity n: per genuine cube Q a kernel on
/// chld_n(Q) x chld_n(Q), the children in row-major order inside Q.
struct CubeShiftSpec {
  struct Entry {
    int level = 0;
    std::array<std::int64_t, kMaxCubeDimension> index{};  ///< cube coordinates at `level`
    std::vector<double> kernel;
  };
  int dim = 1;
  int cube_depth = 1;
  int complexity = 1;
  std::vector<Entry> entries;

  std::size_t block_count() const noexcept { return std::size_t{1} << (dim * complexity); }
  static CubeShiftSpec random(int d, int cube_depth, int n, Rng& rng);
};

CubeFunction apply_cube_shift(const CubeShiftSpec& spec, const CubeFunction& f);

/// The one-dimensional shift of complexity n d acting on transferred
/// functions; active levels are d times the cube levels.
ops::HaarShiftSpec remodel_shift(const RemodelMap& map, const CubeShiftSpec& spec);

}  // namespace haarlab
