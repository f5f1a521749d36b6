#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gaplab/common.hpp"
#include "gaplab/error.hpp"
#include "gaplab/tridiagonal.hpp"

namespace gaplab {

using ScalarFunction = std::function<double(double)>;

inline Interval intersect(const Interval& x, const Interval& y) { return {std::max(x.a, y.a), std::min(x.b, y.b)}; }

struct Atom {
  double x = 0;
  double mass = 0;
};

// Nonnegative measure on `interval`, equal to +infinity outside `dom`.
// Absolutely continuous part: `density` plus the distributional derivative of
// the nondecreasing function `cumulative` (either may be empty). Atoms are point masses.
struct MeasurePotential {
  Interval interval = kIpi;
  Interval dom = kIpi;
  ScalarFunction density;
  ScalarFunction cumulative;
  std::vector<Atom> atoms;

  static MeasurePotential zero(const Interval& I = kIpi) { return {I, I, {}, {}, {}}; }
  static MeasurePotential smooth(ScalarFunction q, const Interval& I = kIpi) { return {I, I, std::move(q), {}, {}}; }

  // Density given by samples on a uniform grid (linear interpolation).
  static MeasurePotential from_samples(const Grid1D& grid, std::vector<double> density, std::vector<Atom> atoms,
                                       std::optional<Interval> dom = std::nullopt) {
    for (double d : density)
      if (!(d >= 0)) throw InvalidInput("density samples must be nonnegative");
    for (const Atom& at : atoms)
      if (!(at.mass >= 0)) throw InvalidInput("atom masses must be nonnegative");
    MeasurePotential q;
    q.interval = grid.I;
    q.dom = dom.value_or(grid.I);
    q.density = GridFunction1D{grid, std::move(density)};
    q.atoms = std::move(atoms);
    q.validate();
    return q;
  }

  void validate() const {
    require_interval(interval);
    if (!(dom.b > dom.a)) throw InvalidInput("empty finiteness domain");
    if (dom.a < interval.a - 1e-12 || dom.b > interval.b + 1e-12)
      throw InvalidInput("finiteness domain must lie inside the interval");
  }
};

struct Weight1D {
  Interval interval = kIpi;
  ScalarFunction p;

  double operator()(double x) const { return p(x); }

  static Weight1D from_samples(const Grid1D& grid, std::vector<double> samples) {
    return {grid.I, GridFunction1D{grid, std::move(samples)}};
  }
};

// Nondecreasing extended-real function on `interval`; finite on `dom`, -inf to
// its left and +inf to its right. `jumps` lists known discontinuities.
struct MonotoneProfile {
  Interval interval = kIpi;
  Interval dom = kIpi;
  ScalarFunction psi;
  Grid1D grid{kIpi, 2048};  // sampling grid for pairwise tests
  std::vector<double> jumps;

  double operator()(double x) const {
    if (x <= dom.a) return -std::numeric_limits<double>::infinity();
    if (x >= dom.b) return std::numeric_limits<double>::infinity();
    return psi(x);
  }

  static MonotoneProfile from_samples(const Grid1D& grid, std::vector<double> values,
                                      std::optional<Interval> dom = std::nullopt) {
    MonotoneProfile m;
    m.interval = grid.I;
    m.dom = dom.value_or(grid.I);
    m.grid = grid;
    m.psi = GridFunction1D{grid, std::move(values)};
    return m;
  }

  // Sample nodes of `grid` lying strictly inside dom.
  std::vector<double> sample_nodes() const {
    std::vector<double> xs;
    for (int i = 0; i <= grid.n; ++i) {
      const double x = grid.x(i);
      if (dom.contains(x) && interval.contains(x)) xs.push_back(x);
    }
    return xs;
  }

  bool is_monotone(double eps = 1e-10) const {
    const auto xs = sample_nodes();
    for (std::size_t i = 1; i < xs.size(); ++i)
      if (psi(xs[i]) < psi(xs[i - 1]) - eps) return false;
    return true;
  }
};

struct EigenResult1D {
  double value = 0;
  GridFunction1D eigenfunction;
  int grid_size = 0;
  double extrapolated_value = 0;
  double error_estimate = 0;
  double roundoff = 0;           // rounding floor of the fine-grid solve
  bool steep_potential = false;  // potential not resolved near the domain ends

  double tol() const { return 3 * error_estimate + roundoff; }
};

namespace detail {

inline void normalize_trapezoid(GridFunction1D& f) {
  const double h = f.grid.h();
  double s = 0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double w = (i == 0 || i + 1 == f.values.size()) ? 0.5 : 1.0;
    s += w * f.values[i] * f.values[i];
  }
  s = std::sqrt(s * h);
  if (!(s > 0)) throw SolverFailed("zero eigenfunction");
  double sum = 0;
  for (double v : f.values) sum += v;
  const double sign = sum < 0 ? -1.0 : 1.0;
  for (double& v : f.values) v *= sign / s;
}

struct Dirichlet1DSolve {
  double value;
  GridFunction1D eigenfunction;
  bool steep;
};

inline Dirichlet1DSolve dirichlet_solve(const Interval& J, const MeasurePotential& q, int n, bool want_vector) {
  const Grid1D grid{J, n};
  const double h = grid.h();
  const int m = n - 1;  // interior nodes 1..n-1
  SymTridiagonal t;
  t.diag.assign(m, 2 / (h * h));
  t.off.assign(m - 1, -1 / (h * h));
  std::vector<double> pot(m, 0.0);
  for (int k = 0; k < m; ++k) {
    const double x = grid.x(k + 1);
    if (q.density) pot[k] += q.density(x);
    if (q.cumulative) pot[k] += (q.cumulative(x + h / 2) - q.cumulative(x - h / 2)) / h;
  }
  for (const Atom& at : q.atoms) {
    if (!J.contains(at.x)) continue;
    int k = static_cast<int>(std::lround((at.x - J.a) / h));
    k = std::clamp(k, 1, n - 1);
    pot[k - 1] += at.mass / h;
  }
  for (int k = 0; k < m; ++k) {
    if (!std::isfinite(pot[k]) || pot[k] < -1e-12) throw SolverFailed("potential not finite or negative on the grid");
    t.diag[k] += pot[k];
  }
  const bool steep = std::max(pot.front(), pot.back()) * h * h > 10;
  Dirichlet1DSolve out{tridiagonal_eigenvalue(t, 0), GridFunction1D{grid, {}}, steep};
  if (want_vector) {
    const auto y = tridiagonal_eigenvector(t, out.value);
    out.eigenfunction.values.assign(n + 1, 0.0);
    for (int k = 0; k < m; ++k) out.eigenfunction.values[k + 1] = y[k];
    normalize_trapezoid(out.eigenfunction);
  }
  return out;
}

struct Neumann1DSolve {
  double value;
  GridFunction1D eigenfunction;
};

inline Neumann1DSolve neumann_solve(const Interval& I, const Weight1D& p, int n, bool want_vector) {
  const double h = I.length() / n;
  std::vector<double> mass(n), face(n > 1 ? n - 1 : 0);
  for (int i = 0; i < n; ++i) {
    mass[i] = p(I.a + (i + 0.5) * h);
    if (!(mass[i] > 0) || !std::isfinite(mass[i])) throw DegenerateWeight("weight not positive inside the interval");
  }
  for (int i = 0; i + 1 < n; ++i) face[i] = p(I.a + (i + 1) * h);
  SymTridiagonal t;
  t.diag.assign(n, 0.0);
  t.off.assign(n - 1, 0.0);
  for (int i = 0; i + 1 < n; ++i) {
    const double w = std::max(face[i], 0.0) / (h * h);
    t.diag[i] += w / mass[i];
    t.diag[i + 1] += w / mass[i + 1];
    t.off[i] = -w / std::sqrt(mass[i] * mass[i + 1]);
  }
  Neumann1DSolve out{tridiagonal_eigenvalue(t, 1), GridFunction1D{Grid1D{I, n}, {}}};
  if (want_vector) {
    auto y = tridiagonal_eigenvector(t, out.value);
    for (int i = 0; i < n; ++i) y[i] /= std::sqrt(mass[i]);
    auto& v = out.eigenfunction.values;
    v.assign(n + 1, 0.0);
    v[0] = y[0];
    v[n] = y[n - 1];
    for (int i = 1; i < n; ++i) v[i] = 0.5 * (y[i - 1] + y[i]);
    normalize_trapezoid(out.eigenfunction);
  }
  return out;
}

// Bisection resolves eigenvalues to about eps * ||T||, ||T|| ~ 4 / h^2.
inline double roundoff_floor(const Interval& I, int n, double value) {
  const double h = I.length() / n;
  return 16 * std::numeric_limits<double>::epsilon() * (4 / (h * h) + std::abs(value));
}

}  // namespace detail

// First Dirichlet eigenvalue of -v'' + q v on I intersected with the finiteness domain.
inline EigenResult1D dirichlet_eig1(const Interval& I, const MeasurePotential& q, int n = 2048) {
  require_interval(I);
  q.validate();
  if (n < 64) throw InvalidInput("grid size must be at least 64");
  const Interval J = intersect(I, q.dom);
  if (!(J.b > J.a)) throw InvalidInput("empty finiteness domain");
  auto coarse = detail::dirichlet_solve(J, q, n, true);
  auto fine = detail::dirichlet_solve(J, q, 2 * n, false);
  EigenResult1D r;
  r.value = coarse.value;
  r.eigenfunction = std::move(coarse.eigenfunction);
  r.grid_size = n;
  r.extrapolated_value = richardson2(coarse.value, fine.value);
  r.error_estimate = std::abs(fine.value - coarse.value);
  r.steep_potential = coarse.steep || fine.steep;
  r.roundoff = detail::roundoff_floor(J, 2 * n, r.extrapolated_value);
  return r;
}

// First nonzero eigenvalue of -(p v')' = mu p v with natural boundary conditions.
inline EigenResult1D neumann_weighted_eig1(const Interval& I, const Weight1D& p, int n = 2048) {
  require_interval(I);
  if (n < 64) throw InvalidInput("grid size must be at least 64");
  auto coarse = detail::neumann_solve(I, p, n, true);
  auto fine = detail::neumann_solve(I, p, 2 * n, false);
  EigenResult1D r;
  r.value = coarse.value;
  r.eigenfunction = std::move(coarse.eigenfunction);
  r.grid_size = n;
  r.extrapolated_value = richardson2(coarse.value, fine.value);
  r.error_estimate = std::abs(fine.value - coarse.value);
  r.roundoff = detail::roundoff_floor(I, 2 * n, r.extrapolated_value);
  return r;
}

// ---------------------------------------------------------------------------
// Class A: psi(y) - psi(x) >= 2 tan((y - x) / 2) for x < y.

struct ClassACheck {
  bool member = true;
  double worst_violation = 0;  // max of 2 tan((y-x)/2) - (psi(y) - psi(x)); <= 0 means slack
  double x = 0, y = 0;
};

inline ClassACheck is_in_class_A(const MonotoneProfile& psi, double eps = 1e-8) {
  const auto xs = psi.sample_nodes();
  ClassACheck out;
  out.worst_violation = -std::numeric_limits<double>::infinity();
  const std::size_t m = xs.size();
  if (m < 2) {
    out.worst_violation = 0;
    return out;
  }
  std::vector<double> v(m), bound(m);
  for (std::size_t i = 0; i < m; ++i) v[i] = psi.psi(xs[i]);
  const double h = psi.grid.h();
  for (std::size_t k = 0; k < m; ++k) bound[k] = 2 * std::tan(0.5 * k * h);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const std::size_t k = static_cast<std::size_t>(std::lround((xs[j] - xs[i]) / h));
      const double viol = bound[k] - (v[j] - v[i]);
      if (viol > out.worst_violation) {
        out.worst_violation = viol;
        out.x = xs[i];
        out.y = xs[j];
      }
    }
  out.member = out.worst_violation <= eps;
  return out;
}

enum class ProfilePotential { PsiPrimePlusPsiSq, TwoPsiSq, TwoPsiPrime };

// psi' + psi^2, 2 psi^2 or 2 psi' as a measure potential (psi' taken distributionally).
inline MeasurePotential potential_from_profile(const MonotoneProfile& psi, ProfilePotential kind) {
  MeasurePotential q;
  q.interval = psi.interval;
  q.dom = intersect(psi.interval, psi.dom);
  const ScalarFunction f = psi.psi;
  switch (kind) {
    case ProfilePotential::PsiPrimePlusPsiSq:
      q.cumulative = f;
      q.density = [f](double x) { const double v = f(x); return v * v; };
      break;
    case ProfilePotential::TwoPsiSq:
      q.density = [f](double x) { const double v = f(x); return 2 * v * v; };
      break;
    case ProfilePotential::TwoPsiPrime:
      q.cumulative = [f](double x) { return 2 * f(x); };
      break;
  }
  return q;
}

inline MonotoneProfile tan_profile(const Interval& dom = kIpi, int grid_n = 2048) {
  MonotoneProfile m;
  m.dom = dom;
  m.psi = [](double x) { return std::tan(x); };
  m.grid = Grid1D{kIpi, grid_n};
  return m;
}

// psi_p = -(log p^{1/2})' and m_p = psi_p' + psi_p^2 from samples of p at n + 1 grid nodes.
struct WeightMeasure {
  MonotoneProfile psi;
  MeasurePotential measure;
};

inline WeightMeasure measure_from_weight(const Weight1D& p, int n = 2048) {
  require_interval(p.interval);
  if (n < 8) throw InvalidInput("grid too coarse");
  const Grid1D grid{p.interval, n};
  const double h = grid.h();
  // Interior nodes only: weights like cos^2 vanish at the ends.
  std::vector<double> logp(n + 1, 0.0);
  for (int i = 1; i < n; ++i) {
    const double v = p(grid.x(i));
    if (!(v > 0) || !std::isfinite(v)) throw DegenerateWeight("weight not positive inside the interval");
    logp[i] = std::log(v);
  }
  // psi at half nodes x_{i+1/2}, i = 1..n-2.
  const int nh = n - 2;
  std::vector<double> psi_half(nh);
  for (int k = 0; k < nh; ++k) psi_half[k] = -0.5 * (logp[k + 2] - logp[k + 1]) / h;
  double scale = 1;
  for (double v : psi_half) scale = std::max(scale, std::abs(v));
  // Node masses of psi' at nodes 2..n-2.
  std::vector<double> mass(nh - 1);
  for (int k = 0; k + 1 < nh; ++k) {
    mass[k] = psi_half[k + 1] - psi_half[k];
    if (mass[k] < -1e-9 * scale) throw NotLogConcave("weight is not log-concave");
    mass[k] = std::max(mass[k], 0.0);
  }
  std::vector<Atom> atoms;
  std::vector<double> dens(n + 1, 0.0);
  const int nm = static_cast<int>(mass.size());
  for (int k = 0; k < nm; ++k) {
    const int node = k + 2;
    const double left = k > 0 ? mass[k - 1] : 0.0;
    const double right = k + 1 < nm ? mass[k + 1] : 0.0;
    const double psi_node = 0.5 * (psi_half[k] + psi_half[k + 1]);
    const bool atom = mass[k] > 1e-8 && mass[k] > 16 * std::max(left, right) + 1e-12;
    if (atom) {
      atoms.push_back({grid.x(node), mass[k]});
      dens[node] = psi_node * psi_node;
    } else {
      dens[node] = mass[k] / h + psi_node * psi_node;
    }
  }
  dens[0] = dens[1] = dens[2];
  dens[n] = dens[n - 1] = dens[n - 2];

  const Grid1D half_grid{{p.interval.a + 1.5 * h, p.interval.b - 1.5 * h}, nh - 1};
  WeightMeasure out;
  out.psi = MonotoneProfile::from_samples(half_grid, psi_half);
  out.psi.interval = p.interval;
  out.psi.dom = p.interval;
  out.measure = MeasurePotential::from_samples(grid, std::move(dens), std::move(atoms));
  return out;
}

// Discrete log-concavity: second differences of log p are <= eps.
inline bool is_log_concave(const Weight1D& p, int n = 1024, double eps = 1e-9) {
  const Grid1D grid{p.interval, n};
  std::vector<double> l(n + 1);
  for (int i = 1; i < n; ++i) {
    const double v = p(grid.x(i));
    if (!(v > 0)) return false;
    l[i] = std::log(v);
  }
  for (int i = 2; i + 1 < n; ++i)
    if (l[i - 1] - 2 * l[i] + l[i + 1] > eps * std::max(1.0, std::abs(l[i]))) return false;
  return true;
}

// h^{1/m} concave on the sample grid.
inline bool is_power_concave(const Weight1D& h, double m, int n = 1024, double eps = 1e-9) {
  const Grid1D grid{h.interval, n};
  std::vector<double> g(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double v = h(grid.x(i));
    if (v < 0) return false;
    g[i] = std::pow(v, 1.0 / m);
  }
  double scale = 1e-300;
  for (double v : g) scale = std::max(scale, std::abs(v));
  for (int i = 1; i < n; ++i)
    if (g[i - 1] - 2 * g[i] + g[i + 1] > eps * scale) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Sharp-bound checks.

struct BoundReport {
  double lambda = 0;        // extrapolated
  double error = 0;
  double tol = 0;
  double bound = 0;
  double excess = 0;        // lambda - bound
  bool pass = false;
};

inline BoundReport make_bound_report(const EigenResult1D& r, double bound) {
  BoundReport b;
  b.lambda = r.extrapolated_value;
  b.error = r.error_estimate;
  b.tol = r.tol();
  b.bound = bound;
  b.excess = b.lambda - bound;
  b.pass = b.lambda >= bound - b.tol;
  return b;
}

inline void require_class_A(const MonotoneProfile& psi) {
  if (!psi.is_monotone()) throw PreconditionFailed("profile is not nondecreasing");
  const auto c = is_in_class_A(psi);
  if (!c.member)
    throw PreconditionFailed("profile violates the class constraint by " + std::to_string(c.worst_violation) +
                             " at (" + std::to_string(c.x) + ", " + std::to_string(c.y) + ")");
}

// lambda_1(I_pi, psi' + psi^2) >= 3.
inline BoundReport check_bound_stima3(const MonotoneProfile& psi, int n = 2048) {
  require_class_A(psi);
  const auto r = dirichlet_eig1(psi.interval, potential_from_profile(psi, ProfilePotential::PsiPrimePlusPsiSq), n);
  return make_bound_report(r, 3.0);
}

struct SplitReport {
  BoundReport full;        // psi' + psi^2 against 3
  BoundReport two_psi_sq;  // 2 psi^2 against 2
  BoundReport two_dpsi;    // 2 psi' against 4
  double split_mean = 0;   // (lambda(2psi') + lambda(2psi^2)) / 2
  bool split_pass = false;
  bool pass = false;
};

inline SplitReport check_split_bounds(const MonotoneProfile& psi, int n = 2048) {
  require_class_A(psi);
  SplitReport s;
  const Interval I = psi.interval;
  s.full = make_bound_report(dirichlet_eig1(I, potential_from_profile(psi, ProfilePotential::PsiPrimePlusPsiSq), n), 3.0);
  s.two_psi_sq = make_bound_report(dirichlet_eig1(I, potential_from_profile(psi, ProfilePotential::TwoPsiSq), n), 2.0);
  s.two_dpsi = make_bound_report(dirichlet_eig1(I, potential_from_profile(psi, ProfilePotential::TwoPsiPrime), n), 4.0);
  s.split_mean = 0.5 * (s.two_psi_sq.lambda + s.two_dpsi.lambda);
  const double tol = s.full.tol + 0.5 * (s.two_psi_sq.tol + s.two_dpsi.tol);
  s.split_pass = s.full.lambda >= s.split_mean - tol;
  s.pass = s.full.pass && s.two_psi_sq.pass && s.two_dpsi.pass && s.split_pass;
  return s;
}

struct RefinedAffineReport {
  bool precondition_ok = true;
  std::string precondition_note;
  double lambda = 0;
  double error = 0;
  bool hypothesis_met = false;  // lambda <= 7
  double h_ratio_term = 0;      // (1 - min/max)^2 of h at the affine interval ends
  double implied_K = 0;         // (lambda - 3) m pi^2 / (8 term)
  bool pass = false;
};

// psi = f + g/2 with g = -(log h)', h (1/m)-concave and affine on `affine` (which must contain I_{pi/4}).
inline RefinedAffineReport check_refined_affine(const MonotoneProfile& f, const Weight1D& h, double m,
                                                const Interval& affine, int n = 2048) {
  RefinedAffineReport rep;
  std::string note;
  if (!is_in_class_A(f).member) note += "f not in class A; ";
  if (!is_power_concave(h, m)) note += "h not (1/m)-concave; ";
  if (affine.a > -kPi / 8 + 1e-12 || affine.b < kPi / 8 - 1e-12) note += "affine interval does not contain I_{pi/4}; ";
  {
    const double ha = h(affine.a), hb = h(affine.b);
    double worst = 0;
    for (int i = 1; i < 64; ++i) {
      const double x = affine.a + affine.length() * i / 64.0;
      const double lin = ha + (hb - ha) * (x - affine.a) / affine.length();
      worst = std::max(worst, std::abs(h(x) - lin));
    }
    if (worst > 1e-9 * std::max({std::abs(ha), std::abs(hb), 1e-300})) note += "h not affine on the interval; ";
  }
  rep.precondition_ok = note.empty();
  rep.precondition_note = note;

  const double dx = 1e-6;
  MonotoneProfile psi = f;
  const ScalarFunction ff = f.psi;
  psi.psi = [ff, h, dx](double x) {
    const double g = -(std::log(h(x + dx)) - std::log(h(x - dx))) / (2 * dx);
    return ff(x) + 0.5 * g;
  };
  const auto r = dirichlet_eig1(psi.interval, potential_from_profile(psi, ProfilePotential::PsiPrimePlusPsiSq), n);
  rep.lambda = r.extrapolated_value;
  rep.error = r.error_estimate;
  rep.hypothesis_met = rep.lambda <= 7;
  const double ha = h(affine.a), hb = h(affine.b);
  const double ratio = std::min(ha, hb) / std::max(ha, hb);
  rep.h_ratio_term = (1 - ratio) * (1 - ratio);
  if (rep.h_ratio_term > 0) rep.implied_K = (rep.lambda - 3) * m * kPi * kPi / (8 * rep.h_ratio_term);
  if (!rep.precondition_ok)
    rep.pass = false;
  else if (!rep.hypothesis_met)
    rep.pass = true;  // vacuous
  else
    rep.pass = rep.lambda >= 3 - r.tol() && (rep.h_ratio_term == 0 || rep.lambda - 3 > -r.tol());
  return rep;
}

// ---------------------------------------------------------------------------
// Seeded class-A generator:
//   psi(x) = c + tan(s (x - x0)) / s + a x + sum_k heights_k [x >= positions_k],
// finite on |x - x0| < pi / (2 s) intersected with I_pi. Each summand keeps
// increments above 2 tan((y - x) / 2) since tan(s t) >= s tan t for s >= 1.

struct ClassAParams {
  double s = 1, x0 = 0, c = 0, a = 0;
  std::vector<std::pair<double, double>> steps;  // (position, height >= 0)
};

inline MonotoneProfile make_class_A_profile(const ClassAParams& p, int grid_n = 2048) {
  MonotoneProfile m;
  m.dom = intersect(kIpi, {p.x0 - kPi / (2 * p.s), p.x0 + kPi / (2 * p.s)});
  m.grid = Grid1D{kIpi, grid_n};
  m.psi = [p](double x) {
    double v = p.c + std::tan(p.s * (x - p.x0)) / p.s + p.a * x;
    for (const auto& [pos, ht] : p.steps)
      if (x >= pos) v += ht;
    return v;
  };
  for (const auto& st : p.steps) m.jumps.push_back(st.first);
  return m;
}

// Sample 0 is tan x itself.
inline ClassAParams random_class_A_params(Rng& rng, int index) {
  ClassAParams p;
  if (index == 0) return p;
  p.s = rng.uniform() < 0.5 ? 1.0 : rng.uniform(1.0, 2.0);
  p.x0 = rng.uniform(-0.3, 0.3);
  p.c = rng.uniform(-1.0, 1.0);
  p.a = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 1.0);
  const int nsteps = rng.integer(0, 3);
  const double lo = std::max(-kPi / 2, p.x0 - kPi / (2 * p.s));
  const double hi = std::min(kPi / 2, p.x0 + kPi / (2 * p.s));
  for (int k = 0; k < nsteps; ++k) p.steps.push_back({rng.uniform(lo + 0.1, hi - 0.1), rng.uniform(0.0, 1.0)});
  return p;
}

}  // namespace gaplab
