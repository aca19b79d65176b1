#pragma once

// Operators in Haar coordinates: martingale multipliers, elementary dyadic
// shifts, general Haar shifts of complexity n, slicing, and paraproducts.

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "haarlab/dyadic.hpp"
#include "haarlab/random.hpp"

namespace haarlab::ops {

/// Type-erased linear map on step functions over one grid. `apply_transpose`
/// is the adjoint with respect to the unweighted L^2 pairing.
struct LinearMap {
  DyadicGrid grid;
  std::function<StepFunction(const StepFunction&)> apply;
  std::function<StepFunction(const StepFunction&)> apply_transpose;
  std::string name;

  StepFunction operator()(const StepFunction& f) const { return apply(f); }
};

LinearMap identity_map(const DyadicGrid& grid);
/// E_{[0,1)} f = <f>_{[0,1)} 1.
LinearMap root_average_map(const DyadicGrid& grid);
/// T composed with I - E_{[0,1)}.
LinearMap restrict_to_mean_zero(const LinearMap& map);
/// Adjoint of `map` in L^2(w): f -> w^{-1} T^t(w f).
LinearMap weighted_adjoint(const LinearMap& map, const std::vector<double>& weight);

// --- martingale multipliers ------------------------------------------------

/// T_sigma f = <f>_{[0,1)} + sum_I sigma_I (f, h_I) h_I.
class MultiplierSpec {
 public:
  /// sigma is heap-indexed over internal nodes (size 2^N, slot 0 ignored).
  /// Throws ValidationError if some |sigma_I| > 1.
  MultiplierSpec(DyadicGrid grid, std::vector<double> sigma);

  static MultiplierSpec constant(const DyadicGrid& grid, double s);
  static MultiplierSpec random(const DyadicGrid& grid, Rng& rng);
  /// sigma_I = s at one node, zero elsewhere.
  static MultiplierSpec single(const DyadicGrid& grid, const DyadicNode& node, double s);

  const DyadicGrid& grid() const noexcept { return grid_; }
  double sigma(const DyadicNode& node) const;
  const std::vector<double>& sigma_values() const noexcept { return sigma_; }
  double max_abs() const noexcept;

 private:
  DyadicGrid grid_;
  std::vector<double> sigma_;
};

StepFunction apply_multiplier(const MultiplierSpec& spec, const StepFunction& f);
LinearMap as_map(const MultiplierSpec& spec);

// --- general Haar shifts ----------------------------------------------------

/// Sum over Q of Sha_Q Delta^n_Q with Sha_Q an integral operator on Q whose
/// kernel is constant on chld_n(Q) x chld_n(Q) and bounded by |Q|^{-1}.
class HaarShiftSpec {
 public:
  struct Entry {
    DyadicNode q;
    /// Row-major 2^n x 2^n; row = output block, column = input block.
    std::vector<double> kernel;
  };

  /// Entries are sorted by heap index; duplicates, out-of-grid nodes and
  /// kernel entries above |Q|^{-1} (relative slack 1e-12) throw ValidationError.
  HaarShiftSpec(DyadicGrid grid, int complexity, std::vector<Entry> entries);

  /// Every admissible Q carries a kernel with independent entries
  /// +-|Q|^{-1} (the normalization is tight entrywise).
  static HaarShiftSpec random(const DyadicGrid& grid, int complexity, Rng& rng);

  const DyadicGrid& grid() const noexcept { return grid_; }
  int complexity() const noexcept { return complexity_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t block_count() const noexcept { return std::size_t{1} << complexity_; }
  /// Distinct levels of the active nodes, ascending.
  std::vector<int> active_levels() const;

 private:
  DyadicGrid grid_;
  int complexity_;
  std::vector<Entry> entries_;
};

StepFunction apply_haar_shift(const HaarShiftSpec& spec, const StepFunction& f);
/// Kernels transposed; the L^2 adjoint of the shift.
HaarShiftSpec transpose(const HaarShiftSpec& spec);
LinearMap as_map(const HaarShiftSpec& spec);

/// Restriction to Q with l(Q) = 2^{k + nj}, i.e. levels L with (L + k) % n == 0.
/// The n slices sum to the full shift. Throws ValidationError unless 0 <= k < n.
HaarShiftSpec slice(const HaarShiftSpec& spec, int k);

/// Local pieces of the shift bilinear form at one active node.
struct LocalBilinear {
  DyadicNode q;
  double value;  ///< <Sha_Q Delta^n_Q f, Delta^n_Q g>
  double bound;  ///< |Q|^{-1} ||Delta^n_Q f||_1 ||Delta^n_Q g||_1
};
std::vector<LocalBilinear> local_bilinear(const HaarShiftSpec& spec, const StepFunction& f,
                                          const StepFunction& g);

// --- elementary dyadic shifts ----------------------------------------------

/// Sha f = sum_Q sum_{Q', Q''} |Q|^{-1} (f, h_{Q'}^{Q''}) h_{Q''}^{Q'} with
/// Q' in chld_m(Q), Q'' in chld_n(Q) and
/// ||h_{Q'}^{Q''}||_inf ||h_{Q''}^{Q'}||_inf <= 1.
class ElementaryShiftSpec {
 public:
  struct Pair {
    HaarVector source;  ///< h_{Q'}^{Q''}, tested against f
    HaarVector target;  ///< h_{Q''}^{Q'}, placed in the output
  };
  struct Entry {
    DyadicNode q;
    std::vector<Pair> pairs;
  };

  /// Validates placement of every pair and the normalization; the first
  /// violating Q is named in the ValidationError.
  ElementaryShiftSpec(DyadicGrid grid, int m, int n, std::vector<Entry> entries);

  /// All admissible Q active, every (Q', Q'') pair present; Haar vectors are
  /// random and rescaled so the sup-norm product equals `product`.
  static ElementaryShiftSpec random(const DyadicGrid& grid, int m, int n, Rng& rng,
                                    double product = 1.0);

  const DyadicGrid& grid() const noexcept { return grid_; }
  int m() const noexcept { return m_; }
  int n() const noexcept { return n_; }
  int complexity() const noexcept { return std::max(m_, n_) + 1; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

 private:
  DyadicGrid grid_;
  int m_;
  int n_;
  std::vector<Entry> entries_;
};

StepFunction apply_elementary_shift(const ElementaryShiftSpec& spec, const StepFunction& f);
/// Swaps source and target of every pair (and m with n): the L^2 adjoint.
ElementaryShiftSpec adjoint(const ElementaryShiftSpec& spec);
LinearMap as_map(const ElementaryShiftSpec& spec);

/// Assembles a_Q(x, y) = sum h_{Q''}^{Q'}(x) h_{Q'}^{Q''}(y) on the
/// chld_{max(m,n)+1}(Q) blocks and returns the general shift with kernels
/// |Q|^{-1} a_Q. Throws ContractViolation if some ||a_Q||_inf exceeds 1 + 1e-12.
HaarShiftSpec to_general(const ElementaryShiftSpec& spec);

// --- paraproducts ------------------------------------------------------------

/// Pi_phi f = sum over internal I of <f>_I Delta_I phi.
class ParaproductSpec {
 public:
  explicit ParaproductSpec(StepFunction phi);

  const StepFunction& phi() const noexcept { return phi_; }
  const HaarExpansion& expansion() const noexcept { return expansion_; }
  const DyadicGrid& grid() const noexcept { return phi_.grid(); }

 private:
  StepFunction phi_;
  HaarExpansion expansion_;
};

StepFunction apply_paraproduct(const ParaproductSpec& spec, const StepFunction& f);
/// Pi_phi^t g = sum_I |I|^{-1} (Delta_I phi, g) 1_I.
StepFunction apply_paraproduct_transpose(const ParaproductSpec& spec, const StepFunction& g);
LinearMap as_map(const ParaproductSpec& spec);

/// ||phi||_{BMO^d} = (sup_J |J|^{-1} sum_{I subset J} ||Delta_I phi||_2^2)^{1/2},
/// J over internal nodes.
double bmo_norm(const StepFunction& phi);

}  // namespace haarlab::ops
