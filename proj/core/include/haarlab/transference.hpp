#pragma once

// The main-estimate machinery: martingale trees of Bellman points, the plank
// functional alpha, the modified martingale X^+-, theta^+-, and numerical
// checks of every inequality in the chain.

#include <cstdint>
#include <string>
#include <vector>

#include "haarlab/bellman.hpp"
#include "haarlab/error.hpp"
#include "haarlab/random.hpp"

namespace haarlab {

/// The candidate broke its declared gain (or concavity) on a concrete
/// triple. This is a property of the candidate, not of the lemma.
class CandidateViolation : public Error {
 public:
  CandidateViolation(const std::string& what, std::vector<BellmanPoint> points)
      : Error(what), points_(std::move(points)) {}
  const std::vector<BellmanPoint>& points() const noexcept { return points_; }

 private:
  std::vector<BellmanPoint> points_;
};

/// X_I for every I in chld_k(I_0), 0 <= k <= n, heap-indexed relative to
/// I_0 (index 1 is I_0, leaves are 2^n .. 2^{n+1} - 1).
class MartingaleTree {
 public:
  /// Throws ValidationError unless n >= 1, every X_I is in Dom(B_A), and
  /// X_I = (X_{I_1} + X_{I_2})/2 holds to 1e-12 relative.
  MartingaleTree(double A, int n, std::vector<BellmanPoint> nodes);

  double A() const noexcept { return A_; }
  int depth() const noexcept { return n_; }
  std::size_t leaf_count() const noexcept { return std::size_t{1} << n_; }
  const BellmanPoint& root() const { return nodes_[1]; }
  const BellmanPoint& at(std::size_t heap) const { return nodes_.at(heap); }
  const BellmanPoint& at(int level, std::int64_t pos) const;
  const BellmanPoint& leaf(std::size_t i) const { return nodes_.at(leaf_count() + i); }
  const std::vector<BellmanPoint>& nodes() const noexcept { return nodes_; }

 private:
  double A_;
  int n_;
  std::vector<BellmanPoint> nodes_;
};

/// Builds the tree of averages of (f, g, f^2 w, g^2 w^{-1}, w, w^{-1}) from
/// leaf data on 2^{n + extra} cells; the first 2^n-level ancestors are the
/// tree leaves. Throws ValidationError when the result leaves Dom(B_A).
MartingaleTree tree_from_data(double A, int n, const std::vector<double>& f, const std::vector<double>& g,
                              const std::vector<double>& w);

enum class TreeKind { generic, alternating, f_only, g_only };

/// Random tree from random data: extra resolution m in {0, 1, 2}, a cascade
/// weight whose step is halved until every node has uv <= A, and f, g from
/// random Haar coefficients (alternating: f moves only on even levels and g
/// only on odd ones).
MartingaleTree random_martingale_tree(int n, double A, Rng& rng, TreeKind kind = TreeKind::generic);

/// Martingale tree together with M_I; M follows the martingale dynamics
/// except at I_0, where d = M_{I_0} - 2^{-n} sum M_I >= 0.
class ParaTree {
 public:
  ParaTree(MartingaleTree tree, std::vector<double> M);

  const MartingaleTree& tree() const noexcept { return tree_; }
  const std::vector<double>& M() const noexcept { return M_; }
  double d() const noexcept { return d_; }

 private:
  MartingaleTree tree_;
  std::vector<double> M_;
  double d_;
};

/// Random tree with leaf M values in [0, 1), averaged upward, and
/// M_{I_0} raised by a random d that keeps it <= 1.
ParaTree random_para_tree(int n, double A, Rng& rng);

/// Para tree induced by a symbol phi on 2^{n + extra} cells:
/// M_I = |I|^{-1} sum_{J subset I} ||Delta_J phi||^2 with |I_0| = 1, where
/// the leaf values also count the Haar terms below level n. Requires M <= 1.
ParaTree para_tree_from_symbol(double A, int n, const std::vector<double>& phi, const std::vector<double>& f,
                               const std::vector<double>& g, const std::vector<double>& w);

struct PlankFunctional {
  std::vector<double> alpha;
  int sign_f = 1;
  int sign_g = 1;
  /// |<alpha, a>| / ||a||_1 and |<alpha, b>| / ||b||_1 (1 for a zero vector).
  double ratio_f = 1.0;
  double ratio_g = 1.0;
  double sum = 0.0;  ///< sum of alpha as computed
};

/// Maximizes min(s1 <a, alpha>/||a||_1, s2 <b, alpha>/||b||_1) over
/// sum alpha = 0, |alpha_i| <= 1/3 for the four sign patterns. The LP is
/// solved exactly by sweeping the dual parameter. Throws ValidationError if
/// the length is odd or both vectors vanish, and ContractViolation if the
/// result misses the 1/12 contracts.
PlankFunctional plank_alpha(const std::vector<double>& a, const std::vector<double>& b);
/// a_I = f_I - f_{I_0}, b_I = g_I - g_{I_0} over the leaves.
PlankFunctional plank_alpha(const MartingaleTree& tree);

/// alpha = (sign(b) - mean(sign(b))) / 6: sum zero, |alpha| <= 1/3, and
/// <alpha, b> = ||b||_1 / 6 whenever sum b = 0.
std::vector<double> para_alpha(const std::vector<double>& b);

/// X_I^+- = sum_{J subset I} x_J^+- X_J / sum x_J^+- with x^+- = 1 +- alpha,
/// and theta_I^+- = S_I / S_parent. Slot 1 of theta is unused.
struct ModifiedTree {
  int n = 1;
  std::vector<double> x_plus, x_minus;       ///< per leaf
  std::vector<double> sum_plus, sum_minus;   ///< S_I per heap index
  std::vector<BellmanPoint> X_plus, X_minus;
  std::vector<double> theta_plus, theta_minus;
  std::vector<double> M_plus, M_minus;  ///< empty unless built from a ParaTree

  const std::vector<BellmanPoint>& X(int sign) const { return sign > 0 ? X_plus : X_minus; }
  const std::vector<double>& theta(int sign) const { return sign > 0 ? theta_plus : theta_minus; }
  const std::vector<double>& x(int sign) const { return sign > 0 ? x_plus : x_minus; }
};

ModifiedTree build_modified(const MartingaleTree& tree, const std::vector<double>& alpha);
/// M^+- uses the same weights 1 +- alpha as X^+-.
ModifiedTree build_modified(const ParaTree& tree, const std::vector<double>& alpha);

struct IdentityReport {
  double min_theta = 1.0;
  double max_theta_sum_error = 0.0;  ///< |theta_{I1} + theta_{I2} - 1|
  double max_midpoint_error = 0.0;   ///< relative, over all six coordinates
  double max_product_error = 0.0;    ///< |prod theta - x 2^{-n}| / (x 2^{-n})
  double max_root_error = 0.0;       ///< |(X^+ + X^-)/2 - X_{I_0}|, relative
};
IdentityReport check_identities(const MartingaleTree& tree, const ModifiedTree& mod);

struct DomainReport {
  double worst_uv_ratio = 0.0;       ///< max u^+-v^+- / (4A)
  double worst_u_ratio = 0.0;        ///< max u^+-_I / (2 u_I), likewise for v
  double worst_center_ratio = 0.0;   ///< center of sibling segments: uv / (4A)
  double worst_segment_ratio = 0.0;  ///< max uv on sibling segments / (4.5A)
  std::size_t checked_nodes = 0;
  std::size_t checked_segments = 0;
};

/// X_I^+- in Dom(B_{4A}), u^+- <= 2u, v^+- <= 2v, and every sibling segment
/// [X_{I1}^+-, X_{I2}^+-] inside Dom(B_{4.5A}). Throws ContractViolation
/// with the offending node on failure.
DomainReport verify_domains(const MartingaleTree& tree, const ModifiedTree& mod);

struct EstimateReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;        ///< rhs - lhs
  double constant = 72.0;     ///< 72 or 36, divided by gamma in rhs
  double candidate_A = 0.0;   ///< A' = 4.5 A
  double gain_margin = 0.0;          ///< first-step deficit - gamma |df| |dg|
  double first_step_margin = 0.0;    ///< deficit of the first step / (4 gamma) - max df max dg
  double concavity_margin = 0.0;     ///< min over nodes of theta-concavity slack
  double telescoping_margin = 0.0;   ///< B(X^+-) - 2^{-n} sum x B(X_I), min over signs
  double product_error = 0.0;
  double final_diff_margin = 0.0;    ///< telescoped drop / (4 gamma) - max df max dg
  double move_margin = 0.0;          ///< min of 12|f^+- - f_0| - mean|f_I - f_0| and the g version
  double strong_margin = 0.0;        ///< quadratic L^2 version; 0 when not computed
  std::size_t candidate_violations = 0;
  PlankFunctional plank;
};

/// Runs the full chain for one tree. The candidate is evaluated at
/// A' = 4.5A. With `strict` a broken candidate gain or concavity throws
/// CandidateViolation; otherwise it is counted and the chain continues.
EstimateReport main_estimate_check(const MartingaleTree& tree, const BellmanCandidate& candidate,
                                   bool strict = true);

/// Paraproduct version: lhs = d |f_0| mean|g_I - g_0|, constant 36, alpha
/// from para_alpha. Requires a candidate with `para_value`.
EstimateReport para_estimate_check(const ParaTree& tree, const BellmanCandidate& candidate, bool strict = true);

/// deficit with theta = 2^{-n} against 4 gamma (Var f)^{1/2} (Var g)^{1/2}.
double quadratic_strong_margin(const MartingaleTree& tree, const BellmanCandidate& candidate);

}  // namespace haarlab
