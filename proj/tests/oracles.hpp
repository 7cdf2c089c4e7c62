#pragma once

// Reference values computed without the library: closed forms, bisection,
// brute-force grids and finite differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double sech(double z) { return 1.0 / std::cosh(z); }

inline double bisect(const std::function<double(double)>& f, double a, double b, double tol = 1e-15) {
  double fa = f(a);
  for (int i = 0; i < 200 && b - a > tol; ++i) {
    const double mid = 0.5 * (a + b);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0) == (fa < 0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

// Two-node network: Phi = (-x1 + tanh(l x2), -x2 + tanh(l x1)).
inline std::vector<double> tanh2(double x1, double x2, double l) {
  return {-x1 + std::tanh(l * x2), -x2 + std::tanh(l * x1)};
}

// Reduced map on the symmetric subspace.
inline double tanh2_g(double alpha, double l) {
  return -alpha + std::sqrt(2.0) * std::tanh(l * alpha / std::sqrt(2.0));
}

// Positive root of tanh(l tanh(l x)) = x for l > 1.
inline double tanh2_nontrivial_x(double l) {
  return bisect([l](double x) { return std::tanh(l * std::tanh(l * x)) - x; }, 1e-3, 1.0);
}

// Range-block Jacobian deviation for tanh2 around ((0,0), 1):
// 1 - (l/2)(sech^2(l x1) + sech^2(l x2)) with x = ((a+b)/sqrt2, (a-b)/sqrt2).
inline double tanh2_xi2(double a, double b, double l) {
  const double x1 = (a + b) / std::sqrt(2.0);
  const double x2 = (a - b) / std::sqrt(2.0);
  const double s1 = sech(l * x1);
  const double s2 = sech(l * x2);
  return 1.0 - 0.5 * l * (s1 * s1 + s2 * s2);
}

// Brute-force sup of |xi2| over {(a, l-1) in disc of radius r_par} x [-r_perp, r_perp]
// with `per_axis` points per axis (per_axis^3 candidates).
inline double tanh2_dense_L_perp(double r_par, double r_perp, int per_axis = 100) {
  double best = 0.0;
  for (int i = 0; i < per_axis; ++i) {
    const double a = -r_par + 2.0 * r_par * i / (per_axis - 1);
    for (int j = 0; j < per_axis; ++j) {
      const double dl = -r_par + 2.0 * r_par * j / (per_axis - 1);
      if (a * a + dl * dl > r_par * r_par * (1 + 1e-12)) continue;
      for (int k = 0; k < per_axis; ++k) {
        const double b = -r_perp + 2.0 * r_perp * k / (per_axis - 1);
        best = std::max(best, std::abs(tanh2_xi2(a, b, 1.0 + dl)));
      }
    }
  }
  return best;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

}  // namespace oracle
