#include "haarlab/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "haarlab/error.hpp"

namespace haarlab {

BellmanPoint BellmanPoint::operator+(const BellmanPoint& o) const {
  return {f + o.f, g + o.g, F + o.F, G + o.G, u + o.u, v + o.v};
}

BellmanPoint BellmanPoint::operator-(const BellmanPoint& o) const {
  return {f - o.f, g - o.g, F - o.F, G - o.G, u - o.u, v - o.v};
}

BellmanPoint BellmanPoint::operator*(double s) const { return {f * s, g * s, F * s, G * s, u * s, v * s}; }

BellmanPoint BellmanPoint::from_vector(const std::vector<double>& v) {
  if (v.size() != 6) throw ValidationError("a Bellman point has six coordinates");
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

BellmanPoint midpoint(const BellmanPoint& a, const BellmanPoint& b) { return (a + b) * 0.5; }

bool in_domain(const BellmanPoint& x, double A, double tol) {
  if (!(x.u > 0.0) || !(x.v > 0.0)) return false;
  const double uv = x.u * x.v;
  if (uv < 1.0 - tol || uv > A * (1.0 + tol)) return false;
  const double fv = x.F * x.v;
  const double gu = x.G * x.u;
  return x.f * x.f <= fv + tol * std::max(1.0, std::abs(fv)) && x.g * x.g <= gu + tol * std::max(1.0, std::abs(gu));
}

bool in_domain(const BellmanPointPara& x, double A, double tol) {
  return in_domain(x.x, A, tol) && x.M >= -tol && x.M <= 1.0 + tol;
}

namespace {

std::string describe(const char* label, const BellmanPoint& x) {
  std::ostringstream os;
  os.precision(17);
  os << label << " (u, v) = (" << x.u << ", " << x.v << ")";
  return os.str();
}

void require_uv(const char* label, const BellmanPoint& x, double A) {
  if (!(x.u >= 0.0) || !(x.v >= 0.0) || x.u * x.v > A * (1.0 + 1e-12)) {
    throw ValidationError("segment precondition fails at " + describe(label, x) + " for A = " + std::to_string(A));
  }
}

}  // namespace

SegmentMax segment_max_uv(const BellmanPoint& xm, const BellmanPoint& xp, double A) {
  require_uv("X_minus", xm, A);
  require_uv("X_plus", xp, A);
  require_uv("midpoint", midpoint(xm, xp), A);
  const double du = xp.u - xm.u;
  const double dv = xp.v - xm.v;
  // u(t) v(t) = q2 t^2 + q1 t + q0
  const double q2 = du * dv;
  const double q1 = xm.u * dv + xm.v * du;
  const double q0 = xm.u * xm.v;
  SegmentMax best{q0, 0.0};
  const double at_one = xp.u * xp.v;
  if (at_one > best.value) best = {at_one, 1.0};
  if (q2 < 0.0) {
    const double t = -q1 / (2.0 * q2);
    if (t > 0.0 && t < 1.0) {
      const double val = (xm.u + t * du) * (xm.v + t * dv);
      if (val > best.value) best = {val, t};
    }
  }
  return best;
}

std::pair<BellmanPoint, BellmanPoint> extremal_segment(double A) {
  if (!(A > 0.0)) throw ValidationError("A must be positive");
  BellmanPoint xm{0.0, 0.0, 1.0, 1.0, 0.0, 3.0 * A};
  BellmanPoint xp{0.0, 0.0, 1.0, 1.0, 1.0, A};
  return {xm, xp};
}

double segment_max_uv_sampled(const BellmanPoint& xm, const BellmanPoint& xp, int samples) {
  if (samples < 1) throw ValidationError("segment sampling needs at least one step");
  double best = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    best = std::max(best, (xm.u + t * (xp.u - xm.u)) * (xm.v + t * (xp.v - xm.v)));
  }
  return best;
}

BellmanCandidate candidate_quadratic(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("quadratic candidate scale must be positive");
  std::ostringstream name;
  name << "quadratic:scale=" << scale;
  BellmanCandidate c;
  c.name = name.str();
  c.gamma = scale / 2.0;
  c.value = [scale](const BellmanPoint& x, double) { return -scale * (x.f * x.f + x.g * x.g); };
  return c;
}

BellmanCandidate candidate_para_quadratic(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("para candidate scale must be positive");
  std::ostringstream name;
  name << "para-quadratic:scale=" << scale;
  BellmanCandidate c;
  c.name = name.str();
  c.gamma = scale / 2.0;
  c.value = [scale](const BellmanPoint& x, double) { return -scale * (x.f * x.f + x.g * x.g); };
  c.para_value = [scale](const BellmanPoint& x, double M, double) {
    return -scale * (x.f * x.f / (1.0 + M) + x.g * x.g);
  };
  return c;
}

BellmanCandidate candidate_dp(int k, GridSpec grid) {
  if (k < 0 || k > 3) throw ValidationError("dp candidate depth must be in [0, 3]");
  std::ostringstream name;
  name << "dp:k=" << k << ",res=" << grid.res;
  BellmanCandidate c;
  c.name = name.str();
  c.gamma = 1.0;
  c.value = [k, grid](const BellmanPoint& x, double A) { return dp_bellman(x, A, k, grid); };
  return c;
}

BellmanCandidate parse_candidate(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  std::map<std::string, std::string> params;
  if (colon != std::string::npos) {
    std::stringstream rest(spec.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0) throw ValidationError("malformed candidate parameter '" + item + "'");
      params[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  auto number = [&](const std::string& key, double fallback) {
    const auto it = params.find(key);
    if (it == params.end()) return fallback;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(it->second, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != it->second.size()) {
      throw ValidationError("candidate parameter " + key + " is not a number: '" + it->second + "'");
    }
    params.erase(it);
    return v;
  };
  auto finish = [&](BellmanCandidate c) {
    if (!params.empty()) throw ValidationError("unknown candidate parameter '" + params.begin()->first + "'");
    return c;
  };
  if (kind == "quadratic") return finish(candidate_quadratic(number("scale", 2.0)));
  if (kind == "para-quadratic") return finish(candidate_para_quadratic(number("scale", 2.0)));
  if (kind == "dp") {
    const double k = number("k", 2.0);
    const double res = number("res", GridSpec{}.res);
    if (k != std::floor(k)) throw ValidationError("dp depth must be an integer");
    const double steps = 1.0 / res;
    if (!(res > 0.0) || res > 1.0 || std::abs(steps - std::round(steps)) > 1e-9) {
      throw ValidationError("dp resolution must be 1/m for a positive integer m");
    }
    return finish(candidate_dp(static_cast<int>(k), GridSpec{res}));
  }
  throw ValidationError("unknown candidate '" + spec + "'");
}

double midpoint_deficit(const BellmanCandidate& c, const BellmanPoint& x1, const BellmanPoint& x2, double A) {
  return c.value(midpoint(x1, x2), A) - 0.5 * (c.value(x1, A) + c.value(x2, A));
}

QuadraticForm::QuadraticForm(std::vector<std::string> names, Eigen::MatrixXd matrix, int x, int y)
    : names_(std::move(names)), m_(std::move(matrix)), x_(x), y_(y) {
  const auto n = m_.rows();
  if (m_.cols() != n) throw ValidationError("quadratic form matrix must be square");
  if (static_cast<Eigen::Index>(names_.size()) != n) throw ValidationError("one name per variable is required");
  if (x_ < 0 || y_ < 0 || x_ >= n || y_ >= n || x_ == y_) throw ValidationError("invalid distinguished pair");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if (m_(i, j) != m_(j, i)) throw ValidationError("quadratic form matrix must be exactly symmetric");
}

GainSplit quadratic_gain_split(const QuadraticForm& q) {
  const Eigen::MatrixXd& m = q.matrix();
  const Eigen::Index n = m.rows();
  const Eigen::Index r = n - 2;
  std::vector<Eigen::Index> rest;
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != q.x() && i != q.y()) rest.push_back(i);
  const double tol = 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());

  Eigen::Matrix2d p;
  p << m(q.x(), q.x()), m(q.x(), q.y()), m(q.y(), q.x()), m(q.y(), q.y());
  Eigen::MatrixXd cross(2, r);
  Eigen::MatrixXd c(r, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    cross(0, j) = m(q.x(), rest[j]);
    cross(1, j) = m(q.y(), rest[j]);
    for (Eigen::Index k = 0; k < r; ++k) c(j, k) = m(rest[j], rest[k]);
  }

  auto assemble = [&](double x, double y, const Eigen::VectorXd& z) {
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    w[q.x()] = x;
    w[q.y()] = y;
    for (Eigen::Index j = 0; j < r; ++j) w[rest[j]] = z(j);
    return w;
  };

  Eigen::MatrixXd c_pinv = Eigen::MatrixXd::Zero(r, r);
  if (r > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
    const auto& lam = eig.eigenvalues();
    const auto& vec = eig.eigenvectors();
    if (lam(0) < -tol) {
      throw WitnessError("Q is negative along a direction with x = y = 0", assemble(0.0, 0.0, vec.col(0)));
    }
    for (Eigen::Index j = 0; j < r; ++j) {
      const Eigen::VectorXd z = vec.col(j);
      if (lam(j) > tol) {
        c_pinv += z * z.transpose() / lam(j);
        continue;
      }
      const Eigen::Vector2d pz = cross * z;
      if (pz.norm() > tol) {
        // Q is unbounded below along (p, t z) for t -> -infinity.
        const double t = -(std::abs(pz.dot(p * pz)) + 1.0) / pz.squaredNorm();
        throw WitnessError("Q is unbounded below on the (x, y) marginal", assemble(pz(0), pz(1), t * z));
      }
    }
  }
  const Eigen::Matrix2d s = p - cross * c_pinv * cross.transpose();
  GainSplit out;
  out.a = s(0, 0);
  out.b = 0.5 * (s(0, 1) + s(1, 0));
  out.c = s(1, 1);

  auto fail = [&](double x, double y) {
    Eigen::Vector2d xy(x, y);
    const Eigen::VectorXd z = r > 0 ? Eigen::VectorXd(-c_pinv * cross.transpose() * xy) : Eigen::VectorXd();
    throw WitnessError("Q >= 2|xy| fails on the (x, y) marginal", assemble(x, y, z));
  };
  const double sb = out.b < 0.0 ? -1.0 : 1.0;
  if (out.a < -tol) fail(1.0, 0.0);
  if (out.c < -tol) fail(0.0, 1.0);
  if (out.a <= tol) fail(-sb * (out.c / 2.0 + 1.0), 1.0);
  if (out.c <= tol) fail(1.0, -sb * (out.a / 2.0 + 1.0));
  const double need = (std::abs(out.b) + 1.0) * (std::abs(out.b) + 1.0);
  if (out.a * out.c < need * (1.0 - 1e-12)) fail(std::sqrt(out.c), -sb * std::sqrt(out.a));

  out.alpha = std::sqrt(out.a / out.c);
  Eigen::MatrixXd d = m;
  d(q.x(), q.x()) -= out.alpha;
  d(q.y(), q.y()) -= 1.0 / out.alpha;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> check(d);
  out.min_eigenvalue = check.eigenvalues()(0);
  if (out.min_eigenvalue < -1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw ContractViolation("gain split is not positive semidefinite; min eigenvalue " +
                            std::to_string(out.min_eigenvalue));
  }
  return out;
}

}  // namespace haarlab
