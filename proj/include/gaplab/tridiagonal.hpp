#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gaplab/error.hpp"

namespace gaplab {

// Real symmetric tridiagonal matrix: diag (n), off (n - 1).
struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  int size() const { return static_cast<int>(diag.size()); }
};

// Number of eigenvalues strictly below x (Sturm sequence / LDL^T inertia).
inline int sturm_count(const SymTridiagonal& t, double x) {
  const int n = t.size();
  const double tiny = std::numeric_limits<double>::min() * 1e4;
  int count = 0;
  double q = t.diag[0] - x;
  for (int i = 0;; ++i) {
    if (q == 0) q = -tiny;
    if (q < 0) ++count;
    if (i + 1 == n) break;
    q = t.diag[i + 1] - x - t.off[i] * t.off[i] / q;
  }
  return count;
}

inline void gershgorin(const SymTridiagonal& t, double& lo, double& hi) {
  const int n = t.size();
  lo = std::numeric_limits<double>::max();
  hi = -lo;
  for (int i = 0; i < n; ++i) {
    double r = 0;
    if (i > 0) r += std::abs(t.off[i - 1]);
    if (i + 1 < n) r += std::abs(t.off[i]);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
}

// k-th smallest eigenvalue (0-based) by bisection on the Sturm count.
inline double tridiagonal_eigenvalue(const SymTridiagonal& t, int k) {
  const int n = t.size();
  if (n == 0 || k < 0 || k >= n) throw SolverFailed("eigenvalue index out of range");
  double lo, hi;
  gershgorin(t, lo, hi);
  const double scale = std::max(std::abs(lo), std::abs(hi));
  lo -= 1e-12 * scale + 1e-300;
  hi += 1e-12 * scale + 1e-300;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(t, mid) > k)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

// Solves (T - shift I) x = rhs with partial pivoting; rhs is overwritten.
inline void tridiagonal_solve_shifted(const SymTridiagonal& t, double shift, std::vector<double>& rhs) {
  const int n = t.size();
  // Row i of the upper factor holds u0 (diagonal), u1, u2 (two superdiagonals).
  std::vector<double> u0(n), u1(n, 0.0), u2(n, 0.0);
  std::vector<double> d(n), sub(n, 0.0), sup(n, 0.0);
  for (int i = 0; i < n; ++i) {
    d[i] = t.diag[i] - shift;
    if (i + 1 < n) sup[i] = t.off[i], sub[i] = t.off[i];
  }
  const double tiny = 1e-300;
  // Current working row: (a, b, c) at columns i, i+1, i+2.
  double a = d[0], b = n > 1 ? sup[0] : 0.0, c = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i + 1 == n) {
      u0[i] = std::abs(a) < tiny ? tiny : a;
      u1[i] = 0;
      u2[i] = 0;
      break;
    }
    // Next row: (s, dn, sn) at columns i, i+1, i+2.
    const double s = sub[i];
    const double dn = d[i + 1];
    const double sn = (i + 2 < n) ? sup[i + 1] : 0.0;
    if (std::abs(s) > std::abs(a)) {
      // Swap rows i and i+1.
      const double m = a / s;
      u0[i] = s;
      u1[i] = dn;
      u2[i] = sn;
      std::swap(rhs[i], rhs[i + 1]);
      rhs[i + 1] -= m * rhs[i];
      a = b - m * dn;
      b = c - m * sn;
      c = 0;
    } else {
      const double piv = std::abs(a) < tiny ? tiny : a;
      const double m = s / piv;
      u0[i] = piv;
      u1[i] = b;
      u2[i] = c;
      rhs[i + 1] -= m * rhs[i];
      a = dn - m * b;
      b = sn - m * c;
      c = 0;
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    double v = rhs[i];
    if (i + 1 < n) v -= u1[i] * rhs[i + 1];
    if (i + 2 < n) v -= u2[i] * rhs[i + 2];
    rhs[i] = v / u0[i];
  }
}

// Unit eigenvector for an (accurately known) eigenvalue, by inverse iteration.
inline std::vector<double> tridiagonal_eigenvector(const SymTridiagonal& t, double lambda) {
  const int n = t.size();
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = 1.0 + 0.37 * std::sin(1.3 * i + 0.2);
  double lo, hi;
  gershgorin(t, lo, hi);
  const double shift = lambda + 1e-13 * std::max({std::abs(lo), std::abs(hi), 1.0});
  for (int it = 0; it < 4; ++it) {
    tridiagonal_solve_shifted(t, shift, x);
    double nrm = 0;
    for (double v : x) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (!(nrm > 0) || !std::isfinite(nrm)) throw SolverFailed("inverse iteration broke down");
    for (double& v : x) v /= nrm;
  }
  return x;
}

}  // namespace gaplab
