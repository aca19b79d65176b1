#pragma once

// Bellman-function geometry: the domain, the segment lemma, test candidates
// with a checked midpoint gain, finite-depth dynamic programming, and the
// gain split for quadratic forms.

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace haarlab {

/// X = (f, g, F, G, u, v). Any six reals are representable; membership in
/// the domain is a separate predicate.
struct BellmanPoint {
  double f = 0.0, g = 0.0, F = 0.0, G = 0.0, u = 1.0, v = 1.0;

  BellmanPoint operator+(const BellmanPoint& o) const;
  BellmanPoint operator-(const BellmanPoint& o) const;
  BellmanPoint operator*(double s) const;
  friend BellmanPoint operator*(double s, const BellmanPoint& x) { return x * s; }
  bool operator==(const BellmanPoint&) const = default;

  std::vector<double> to_vector() const { return {f, g, F, G, u, v}; }
  static BellmanPoint from_vector(const std::vector<double>& v);
};

BellmanPoint midpoint(const BellmanPoint& a, const BellmanPoint& b);

/// Point of the paraproduct problem: X together with the Carleson mass M.
struct BellmanPointPara {
  BellmanPoint x;
  double M = 0.0;
};

/// u, v > 0, 1 <= uv <= A, f^2 <= F v, g^2 <= G u; each inequality is
/// allowed a relative slack of `tol`.
bool in_domain(const BellmanPoint& x, double A, double tol = 1e-12);
bool in_domain(const BellmanPointPara& x, double A, double tol = 1e-12);

struct SegmentMax {
  double value = 0.0;  ///< max of u(t) v(t) on the segment
  double t = 0.0;      ///< where it is attained; 0 = X_minus, 1 = X_plus
};

/// Closed-form maximum of uv along [X_minus, X_plus] (a quadratic in t).
/// Precondition: u, v > 0 and uv <= A at both endpoints and at the midpoint;
/// otherwise ValidationError names the failing point.
SegmentMax segment_max_uv(const BellmanPoint& x_minus, const BellmanPoint& x_plus, double A);
/// Segment with uv = 0 at X_minus and uv = A at X_plus and at the midpoint;
/// its maximum 9A/8 is attained at t = 3/4.
std::pair<BellmanPoint, BellmanPoint> extremal_segment(double A);
/// Same maximum by sampling `samples` + 1 equispaced points.
double segment_max_uv_sampled(const BellmanPoint& x_minus, const BellmanPoint& x_plus, int samples = 10000);

/// A function on the domain standing in for B_{A}. `gamma` is the declared
/// gain: B(X) - (B(X1) + B(X2))/2 >= gamma |f1 - f2| |g1 - g2| for
/// X = (X1 + X2)/2. For paraproduct candidates `para_value` is set and the
/// gain reads d |f| |g1 - g2| with d = M - (M1 + M2)/2.
struct BellmanCandidate {
  std::string name;
  double gamma = 1.0;
  std::function<double(const BellmanPoint&, double A)> value;
  std::function<double(const BellmanPoint&, double M, double A)> para_value;

  bool is_para() const { return static_cast<bool>(para_value); }
};

/// Phi(X) = -scale (f^2 + g^2); gain scale / 2.
BellmanCandidate candidate_quadratic(double scale = 2.0);
/// Phi(X, M) = -scale (f^2 / (1 + M) + g^2); gain scale / 2 for the
/// paraproduct inequality on 0 <= M <= 1.
BellmanCandidate candidate_para_quadratic(double scale = 2.0);

struct GridSpec {
  double res = 0.25;  ///< step of every split parameter
};

/// B^(k) by dynamic programming; declared gain 1 (unverified, see dp_bellman).
BellmanCandidate candidate_dp(int k, GridSpec grid = {});

/// "quadratic:scale=2", "para-quadratic:scale=2", "dp:k=2,res=0.25".
/// Throws ValidationError on unknown names or parameters.
BellmanCandidate parse_candidate(const std::string& spec);

/// B(X) - (B(X1) + B(X2)) / 2 at X = (X1 + X2) / 2.
double midpoint_deficit(const BellmanCandidate& c, const BellmanPoint& x1, const BellmanPoint& x2, double A);

/// Finite-depth Bellman function: B^(0) = 0 and
///   B^(k)(X) = max |f1 - f2| |g1 - g2| + (B^(k-1)(X1) + B^(k-1)(X2)) / 2
/// over grid splits X = (X1 + X2)/2 with both halves in Dom(B_A).
///
/// Splits are X1 = X + delta, X2 = X - delta with u1 = u(1 + a),
/// v1 = v(1 + b) (a, b on the open grid of (-1, 1)), F1 = F(1 + c),
/// G1 = G(1 + e) (c, e on the closed grid of [-1, 1]), and f1, g1 on the
/// closed grid of the feasible interval left by f_i^2 <= F_i v_i,
/// g_i^2 <= G_i u_i. The candidate set is the same at every depth, so the
/// values are nondecreasing in k. Throws ValidationError if X is outside
/// Dom(B_A) or k is not in [0, 3].
double dp_bellman(const BellmanPoint& x, double A, int k, const GridSpec& grid = {});

/// Symmetric coefficient matrix over named variables with a distinguished
/// pair (x, y).
class QuadraticForm {
 public:
  /// Throws ValidationError unless the matrix is square, exactly symmetric,
  /// matches `names`, and x != y are valid indices.
  QuadraticForm(std::vector<std::string> names, Eigen::MatrixXd matrix, int x, int y);

  const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  int x() const noexcept { return x_; }
  int y() const noexcept { return y_; }
  double operator()(const Eigen::VectorXd& z) const { return z.dot(m_ * z); }

 private:
  std::vector<std::string> names_;
  Eigen::MatrixXd m_;
  int x_;
  int y_;
};

struct GainSplit {
  double alpha = 1.0;
  double a = 0.0, b = 0.0, c = 0.0;  ///< (x, y) marginal a x^2 + 2 b x y + c y^2
  double min_eigenvalue = 0.0;       ///< of Q - (alpha x^2 + y^2 / alpha)
};

/// If Q >= 2|xy| everywhere, returns alpha with Q - (alpha x^2 + alpha^{-1} y^2)
/// positive semidefinite. Otherwise throws WitnessError carrying z with Q(z) < 2 |x y|.
GainSplit quadratic_gain_split(const QuadraticForm& q);

}  // namespace haarlab
