#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "haarlab/bellman.hpp"
#include "haarlab/error.hpp"

namespace haarlab {

namespace {

constexpr double kSlack = 1e-12;

struct Grids {
  std::vector<double> open;    // (-1, 1)
  std::vector<double> closed;  // [-1, 1]
  std::vector<double> unit;    // [0, 1]
};

Grids make_grids(double res) {
  const double steps = 1.0 / res;
  if (!(res > 0.0) || res > 1.0 || std::abs(steps - std::round(steps)) > 1e-9) {
    throw ValidationError("dp resolution must be 1/m for a positive integer m");
  }
  const int m = static_cast<int>(std::round(steps));
  Grids g;
  for (int i = -m; i <= m; ++i) {
    const double t = static_cast<double>(i) / m;
    g.closed.push_back(t);
    if (i != -m && i != m) g.open.push_back(t);
  }
  for (int i = 0; i <= m; ++i) g.unit.push_back(static_cast<double>(i) / m);
  return g;
}

// Feasible values of the first child's mean: x1^2 <= cap1 and
// (2 x - x1)^2 <= cap2.
bool feasible(double x, double cap1, double cap2, double& lo, double& hi) {
  const double r1 = std::sqrt(std::max(cap1, 0.0));
  const double r2 = std::sqrt(std::max(cap2, 0.0));
  lo = std::max(-r1, 2.0 * x - r2);
  hi = std::min(r1, 2.0 * x + r2);
  if (lo <= hi) return true;
  if (lo - hi <= kSlack * std::max(1.0, r1 + r2 + std::abs(x))) {
    lo = hi = 0.5 * (lo + hi);
    return true;
  }
  return false;
}

bool uv_ok(double uv, double A) { return uv >= 1.0 - kSlack && uv <= A * (1.0 + kSlack); }

class Solver {
 public:
  Solver(double A, const GridSpec& spec) : A_(A), g_(make_grids(spec.res)) {}

  double value(const BellmanPoint& x, int k) const {
    if (k == 0) return 0.0;
    if (k == 1) return one_step(x);
    return multi_step(x, k);
  }

 private:
  // k = 1: the product separates over (c, f1) and (e, g1) once (a, b) is fixed.
  double one_step(const BellmanPoint& x) const {
    double best = 0.0;
    for (double a : g_.open) {
      const double u1 = x.u * (1.0 + a), u2 = x.u * (1.0 - a);
      for (double b : g_.open) {
        const double v1 = x.v * (1.0 + b), v2 = x.v * (1.0 - b);
        if (!uv_ok(u1 * v1, A_) || !uv_ok(u2 * v2, A_)) continue;
        double df = -1.0, dg = -1.0;
        double lo = 0.0, hi = 0.0;
        for (double c : g_.closed) {
          if (feasible(x.f, x.F * (1.0 + c) * v1, x.F * (1.0 - c) * v2, lo, hi)) {
            df = std::max(df, std::max(std::abs(lo - x.f), std::abs(hi - x.f)));
          }
          if (feasible(x.g, x.G * (1.0 + c) * u1, x.G * (1.0 - c) * u2, lo, hi)) {
            dg = std::max(dg, std::max(std::abs(lo - x.g), std::abs(hi - x.g)));
          }
        }
        if (df < 0.0 || dg < 0.0) continue;
        best = std::max(best, 4.0 * df * dg);
      }
    }
    return best;
  }

  double multi_step(const BellmanPoint& x, int k) const {
    const std::size_t na = g_.open.size(), nc = g_.closed.size(), ns = g_.unit.size();
    double best = 0.0;
    for (std::size_t ia = 0; ia < na; ++ia) {
      const std::size_t ma = na - 1 - ia;
      if (ma < ia) continue;  // the mirrored split swaps the two children
      const double a = g_.open[ia];
      const double u1 = x.u * (1.0 + a), u2 = x.u * (1.0 - a);
      for (std::size_t ib = 0; ib < na; ++ib) {
        const std::size_t mb = na - 1 - ib;
        if (ma == ia && mb < ib) continue;
        const double b = g_.open[ib];
        const double v1 = x.v * (1.0 + b), v2 = x.v * (1.0 - b);
        if (!uv_ok(u1 * v1, A_) || !uv_ok(u2 * v2, A_)) continue;
        const bool tie_ab = ma == ia && mb == ib;
        for (std::size_t ic = 0; ic < nc; ++ic) {
          const std::size_t mc = nc - 1 - ic;
          if (tie_ab && mc < ic) continue;
          const double F1 = x.F * (1.0 + g_.closed[ic]);
          const double F2 = 2.0 * x.F - F1;
          double flo = 0.0, fhi = 0.0;
          if (!feasible(x.f, F1 * v1, F2 * v2, flo, fhi)) continue;
          for (std::size_t is = 0; is < ns; ++is) {
            const std::size_t ms = ns - 1 - is;
            const bool tie_abcs = tie_ab && mc == ic;
            if (tie_abcs && ms < is) continue;
            const double f1 = flo + g_.unit[is] * (fhi - flo);
            const bool tie_f = tie_abcs && ms == is;
            for (std::size_t ie = 0; ie < nc; ++ie) {
              const std::size_t me = nc - 1 - ie;
              if (tie_f && me < ie) continue;
              const double G1 = x.G * (1.0 + g_.closed[ie]);
              const double G2 = 2.0 * x.G - G1;
              double glo = 0.0, ghi = 0.0;
              if (!feasible(x.g, G1 * u1, G2 * u2, glo, ghi)) continue;
              for (std::size_t it = 0; it < ns; ++it) {
                if (tie_f && me == ie && ns - 1 - it < it) continue;
                const double g1 = glo + g_.unit[it] * (ghi - glo);
                const BellmanPoint x1{f1, g1, F1, G1, u1, v1};
                const BellmanPoint x2{2.0 * x.f - f1, 2.0 * x.g - g1, F2, G2, u2, v2};
                const double gain = 4.0 * std::abs(f1 - x.f) * std::abs(g1 - x.g);
                const double total = gain + 0.5 * (value(x1, k - 1) + value(x2, k - 1));
                best = std::max(best, total);
              }
            }
          }
        }
      }
    }
    return best;
  }

  double A_;
  Grids g_;
};

}  // namespace

double dp_bellman(const BellmanPoint& x, double A, int k, const GridSpec& grid) {
  if (k < 0 || k > 3) throw ValidationError("dp depth must be in [0, 3], got " + std::to_string(k));
  if (!(A >= 1.0)) throw ValidationError("A must be >= 1");
  if (!in_domain(x, A)) throw ValidationError("dp_bellman called outside Dom(B_A)");
  return Solver(A, grid).value(x, k);
}

}  // namespace haarlab
