#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "gaplab/common.hpp"
#include "gaplab/error.hpp"
#include "gaplab/oned_spectral.hpp"
#include "gaplab/piecewise_linear.hpp"
#include "gaplab/sparse_eigen.hpp"

namespace gaplab {

// Continuous piecewise-linear function on a closed interval attaining its global
// minimum at both endpoints, with finitely many strict interior local minima.
// Ties between minimum levels and plateaus at a minimum are rejected.
struct TestFunction {
  PiecewiseLinear f;

  static TestFunction from_grid(const GridFunction1D& g) { return make(PiecewiseLinear::from_grid(g)); }

  static TestFunction make(PiecewiseLinear p) {
    validate(p);
    return {std::move(p)};
  }

  static void validate(const PiecewiseLinear& p) {
    if (p.size() < 3) throw InvalidInput("test function needs at least three nodes");
    for (std::size_t k = 1; k < p.size(); ++k)
      if (!(p.x[k] > p.x[k - 1])) throw InvalidInput("test function nodes must increase");
    const double base = p.y.front();
    if (std::abs(p.y.back() - base) > 1e-12 * std::max(1.0, p.sup_norm()))
      throw InvalidInput("test function must take equal values at both endpoints");
    for (double v : p.y)
      if (v < base - 1e-12 * std::max(1.0, p.sup_norm()))
        throw InvalidInput("test function must attain its minimum at the endpoints");
    // Plateaus above the base level that are local minima.
    std::vector<double> levels;
    const std::size_t n = p.size();
    std::size_t k = 1;
    while (k + 1 < n) {
      std::size_t j = k;
      while (j + 1 < n && p.y[j + 1] == p.y[k]) ++j;
      if (j + 1 >= n) break;
      const bool left_up = p.y[k - 1] > p.y[k];
      const bool right_up = p.y[j + 1] > p.y[j];
      if (left_up && right_up && p.y[k] > base) {
        if (j > k) throw InvalidInput("local minimum attained on a plateau");
        levels.push_back(p.y[k]);
      }
      k = j + 1;
    }
    std::sort(levels.begin(), levels.end());
    for (std::size_t i = 1; i < levels.size(); ++i)
      if (levels[i] == levels[i - 1]) throw InvalidInput("two local minima at the same level");
  }
};

// Interior strict local minima (node index) with level above the endpoint level.
inline std::vector<std::size_t> interior_local_minima(const PiecewiseLinear& p) {
  std::vector<std::size_t> out;
  const double base = std::max(p.y.front(), p.y.back());
  for (std::size_t k = 1; k + 1 < p.size(); ++k)
    if (p.y[k] < p.y[k - 1] && p.y[k] < p.y[k + 1] && p.y[k] > base) out.push_back(k);
  return out;
}

// Symmetric decreasing rearrangement of v on I about the midpoint of I.
// Exact for piecewise-linear input: the distribution function is piecewise
// linear in the level with breakpoints at node values.
inline PiecewiseLinear symmetric_decreasing(const PiecewiseLinear& v_in, const Interval& I) {
  const PiecewiseLinear v = v_in.restrict(I.a, I.b);
  std::vector<double> levels = v.y;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  struct RT {
    double r, t;
  };
  std::vector<RT> pts;
  const double half = I.length() / 2;
  for (double t : levels) {
    const double r_open = std::min(half, v.level_measure(t, false) / 2);
    const double r_closed = std::min(half, v.level_measure(t, true) / 2);
    pts.push_back({r_open, t});
    if (r_closed > r_open) pts.push_back({r_closed, t});
  }
  std::sort(pts.begin(), pts.end(), [](const RT& p, const RT& q) { return p.r < q.r || (p.r == q.r && p.t > q.t); });
  // Keep r strictly increasing; equal radii can only come from rounding.
  std::vector<RT> clean;
  for (const RT& p : pts) {
    if (!clean.empty() && p.r <= clean.back().r) continue;
    clean.push_back(p);
  }
  if (clean.front().r > 0) clean.insert(clean.begin(), {0.0, levels.back()});
  // The lowest level fills the interval.
  if (clean.back().t == levels.front())
    clean.back().r = half;
  else
    clean.push_back({half, levels.front()});
  const double c = I.mid();
  PiecewiseLinear out;
  for (std::size_t k = clean.size(); k-- > 0;) {
    out.x.push_back(c - clean[k].r);
    out.y.push_back(clean[k].t);
  }
  for (std::size_t k = 1; k < clean.size(); ++k) {
    out.x.push_back(c + clean[k].r);
    out.y.push_back(clean[k].t);
  }
  out.x.front() = I.a;
  out.x.back() = I.b;
  out.dedupe();
  return out;
}

struct BlockedResult {
  PiecewiseLinear w;      // the blocked rearrangement on I
  bool has_minimum = false;
  double level = 0;       // lowest local-minimum level
  double minimum_at = 0;  // location of that minimum in the original v
  double c = 0, d = 0;    // {v > level} has closure [c, d]
  double shift = 0;       // translation applied to the part above the level
  std::array<double, 3> split{};  // a1 < a2 < a3: children (a1, a2), (a2, a3) in the output
};

inline BlockedResult blocked_rearrangement_detail(const PiecewiseLinear& v_in, const Interval& I) {
  const PiecewiseLinear v = v_in.restrict(I.a, I.b);
  BlockedResult r;
  const PiecewiseLinear vs = symmetric_decreasing(v, I);
  const auto minima = interior_local_minima(v);
  if (minima.empty()) {
    r.w = vs;
    return r;
  }
  // Lowest level; ties resolved by the leftmost minimum.
  std::size_t km = minima.front();
  for (std::size_t k : minima)
    if (v.y[k] < v.y[km]) km = k;
  r.has_minimum = true;
  r.level = v.y[km];
  r.minimum_at = v.x[km];
  const double l = r.level;
  // Outer crossings of the level.
  std::size_t k = 0;
  while (!(v.y[k + 1] > l)) ++k;
  r.c = v.x[k] + (l - v.y[k]) / (v.y[k + 1] - v.y[k]) * (v.x[k + 1] - v.x[k]);
  std::size_t j = v.size() - 1;
  while (!(v.y[j - 1] > l)) --j;
  r.d = v.x[j] + (l - v.y[j]) / (v.y[j - 1] - v.y[j]) * (v.x[j - 1] - v.x[j]);
  const double len = r.d - r.c;
  const double xl = 0.5 * (r.c + r.d);
  r.shift = I.mid() - xl;
  r.split = {I.mid() - len / 2, r.minimum_at + r.shift, I.mid() + len / 2};

  const PiecewiseLinear inner = v.restrict(r.c, r.d).shifted(r.shift);
  std::vector<PiecewiseLinear> pieces;
  pieces.push_back(vs.restrict(I.a, r.split[0]));
  pieces.push_back(inner);
  pieces.push_back(vs.restrict(r.split[2], I.b));
  pieces[1].y.front() = pieces[1].y.back() = l;
  pieces[0].y.back() = pieces[2].y.front() = l;
  r.w = PiecewiseLinear::concat(pieces);
  return r;
}

inline PiecewiseLinear blocked_rearrangement(const PiecewiseLinear& v, const Interval& I) {
  return blocked_rearrangement_detail(v, I).w;
}

// ---------------------------------------------------------------------------

struct StratNode {
  std::vector<int> index;  // multi-index (1, a2, a3, ...)
  Interval interval;
  int parent = -1;
  std::array<int, 2> child{-1, -1};
  double level = 0;                // level of the split when branching
  std::array<double, 3> split{};   // a1 < a2 < a3 when branching

  bool branching() const { return child[0] >= 0; }
  double mid() const { return interval.mid(); }
};

inline std::string multi_index_string(const std::vector<int>& a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + std::to_string(a[i]);
  return s + ")";
}

struct StratifiedDecomposition {
  std::vector<StratNode> nodes;  // nodes[0] is the root I^1
  std::vector<int> gamma;        // branching nodes
  PiecewiseLinear rearranged;    // the stratified rearrangement

  // Deepest node whose interval contains x.
  int deepest(double x) const {
    int k = 0;
    for (;;) {
      const StratNode& n = nodes[k];
      if (!n.branching()) return k;
      if (x > n.split[0] && x < n.split[1])
        k = n.child[0];
      else if (x > n.split[1] && x < n.split[2])
        k = n.child[1];
      else
        return k;
    }
  }

  // Stratified potential 1 + tan^2(x - x_alpha).
  double potential(double x) const {
    const double t = std::tan(x - nodes[deepest(x)].mid());
    return 1 + t * t;
  }

  // All interval endpoints of the tree, sorted.
  std::vector<double> breakpoints() const {
    std::vector<double> b;
    for (const auto& n : nodes) {
      b.push_back(n.interval.a);
      b.push_back(n.interval.b);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
  }

  // Exact integral of the potential over [lo, hi].
  double potential_integral(double lo, double hi) const {
    if (!(hi > lo)) return 0;
    auto bp = breakpoints();
    std::vector<double> cuts{lo};
    for (double x : bp)
      if (x > lo && x < hi) cuts.push_back(x);
    cuts.push_back(hi);
    double s = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double m = nodes[deepest(0.5 * (cuts[i] + cuts[i + 1]))].mid();
      s += std::tan(cuts[i + 1] - m) - std::tan(cuts[i] - m);  // d/dx tan = 1 + tan^2
    }
    return s;
  }

  std::vector<std::array<double, 3>> constraints() const {
    std::vector<std::array<double, 3>> c;
    for (int g : gamma) c.push_back(nodes[g].split);
    return c;
  }

  GridFunction1D potential_samples(int n) const {
    const Grid1D g{nodes[0].interval, n};
    GridFunction1D f{g, std::vector<double>(n + 1)};
    for (int i = 0; i <= n; ++i) {
      const double x = std::clamp(g.x(i), g.I.a + 1e-12, g.I.b - 1e-12);
      f.values[i] = potential(x);
    }
    return f;
  }
};

namespace detail {

inline void stratify(const PiecewiseLinear& v, const Interval& J, std::vector<int> index, int parent,
                     StratifiedDecomposition& out, std::vector<PiecewiseLinear>& pieces) {
  const int id = static_cast<int>(out.nodes.size());
  StratNode node;
  node.index = index;
  node.interval = J;
  node.parent = parent;
  out.nodes.push_back(node);
  const BlockedResult b = blocked_rearrangement_detail(v, J);
  if (!b.has_minimum) {
    pieces.push_back(b.w);
    return;
  }
  out.nodes[id].level = b.level;
  out.nodes[id].split = b.split;
  out.gamma.push_back(id);
  pieces.push_back(b.w.restrict(J.a, b.split[0]));
  const PiecewiseLinear inner = v.restrict(b.c, b.d).shifted(b.shift);
  for (int j = 0; j < 2; ++j) {
    const Interval child = j == 0 ? Interval{b.split[0], b.split[1]} : Interval{b.split[1], b.split[2]};
    std::vector<int> ci = index;
    ci.push_back(j + 1);
    out.nodes[id].child[j] = static_cast<int>(out.nodes.size());
    stratify(inner, child, ci, id, out, pieces);
  }
  pieces.push_back(b.w.restrict(b.split[2], J.b));
}

}  // namespace detail

inline StratifiedDecomposition stratified(const TestFunction& v) {
  StratifiedDecomposition out;
  std::vector<PiecewiseLinear> pieces;
  const Interval I{v.f.a(), v.f.b()};
  detail::stratify(v.f, I, {1}, -1, out, pieces);
  std::sort(pieces.begin(), pieces.end(), [](const PiecewiseLinear& p, const PiecewiseLinear& q) { return p.a() < q.a(); });
  out.rearranged = PiecewiseLinear::concat(pieces);
  std::sort(out.gamma.begin(), out.gamma.end());
  return out;
}

// ---------------------------------------------------------------------------
// int v^2 d(psi') >= int V v~^2.

struct RearrangementInequalityReport {
  bool vacuous = false;  // v does not vanish outside dom(psi): left side is +infinity
  double lhs = 0;
  double rhs = 0;
  double slack = 0;
  double tol = 0;
  bool pass = false;
};

// int v^2 d(psi') for v vanishing outside dom(psi), by parts: -int 2 v v' psi.
inline double integral_v2_dpsi(const MonotoneProfile& psi, const PiecewiseLinear& v) {
  std::vector<double> cuts;
  const Interval D = intersect(psi.dom, psi.interval);
  cuts.push_back(std::max(D.a, v.a()));
  for (double x : v.x)
    if (x > cuts.front() && x < std::min(D.b, v.b())) cuts.push_back(x);
  for (double x : psi.jumps)
    if (x > cuts.front() && x < std::min(D.b, v.b())) cuts.push_back(x);
  cuts.push_back(std::min(D.b, v.b()));
  std::sort(cuts.begin(), cuts.end());
  double s = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    if (!(hi > lo)) continue;
    const double slope = (v(hi) - v(lo)) / (hi - lo);
    s += gauss_integrate([&](double x) { return -2 * v(x) * slope * psi.psi(x); }, lo, hi);
  }
  return s;
}

inline double integral_potential_v2(const StratifiedDecomposition& d, const PiecewiseLinear& w) {
  std::vector<double> cuts = w.x;
  for (double x : d.breakpoints()) cuts.push_back(x);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double s = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    s += gauss_integrate(
        [&](double x) {
          const double t = w(x);
          return d.potential(x) * t * t;
        },
        cuts[i], cuts[i + 1]);
  return s;
}

inline RearrangementInequalityReport check_rearrangement_inequality(const MonotoneProfile& psi, const TestFunction& v) {
  RearrangementInequalityReport rep;
  const Interval D = intersect(psi.dom, psi.interval);
  const double vmax = v.f.sup_norm();
  const double zero = 1e-14 * std::max(vmax, 1e-300);
  for (std::size_t k = 0; k < v.f.size(); ++k)
    if ((v.f.x[k] <= D.a || v.f.x[k] >= D.b) && std::abs(v.f.y[k]) > zero) rep.vacuous = true;
  if (std::abs(v.f(D.a)) > zero || std::abs(v.f(D.b)) > zero) rep.vacuous = true;
  const auto dec = stratified(v);
  rep.rhs = integral_potential_v2(dec, dec.rearranged);
  if (rep.vacuous) {
    rep.lhs = std::numeric_limits<double>::infinity();
    rep.slack = rep.lhs;
    rep.pass = true;
    return rep;
  }
  rep.lhs = integral_v2_dpsi(psi, v.f);
  rep.slack = rep.lhs - rep.rhs;
  // Tolerance: 2 dx ||v||^2 max density, density of psi' over the cells where v > 0.
  double dx = 0, maxdens = 0;
  for (std::size_t k = 0; k + 1 < v.f.size(); ++k) {
    const double h = v.f.x[k + 1] - v.f.x[k];
    dx = std::max(dx, h);
    if (v.f.y[k] > zero || v.f.y[k + 1] > zero) {
      const double lo = std::max(v.f.x[k], D.a), hi = std::min(v.f.x[k + 1], D.b);
      if (hi > lo) {
        const double a = std::nextafter(lo, hi), b = std::nextafter(hi, lo);
        maxdens = std::max(maxdens, (psi.psi(b) - psi.psi(a)) / (b - a));
      }
    }
  }
  rep.tol = 2 * dx * vmax * vmax * maxdens;
  rep.pass = rep.slack >= -rep.tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Constrained eigenvalue with potential 2V on I_pi:
//   min (int phi'^2 + 2 V phi^2) / int phi^2 over H^1_0 with phi(a1) = phi(a2) = phi(a3).
// P1 elements on a uniform mesh refined by the constraint points; the potential
// enters through exact dual-cell integrals; constraints by merging the
// corresponding degrees of freedom, which spans the constrained space exactly.

struct Eta1Result {
  double value = 0;
  double extrapolated_value = 0;
  double error_estimate = 0;
  int grid_size = 0;

  double tol() const { return 3 * error_estimate + 1e-9 * std::max(1.0, std::abs(extrapolated_value)); }
};

using IntervalIntegral = std::function<double(double, double)>;

namespace detail {

inline double eta1_solve(const Interval& I, const IntervalIntegral& V_integral,
                         const std::vector<std::array<double, 3>>& constraints, int n) {
  const double h = I.length() / n;
  std::vector<double> nodes;
  for (int i = 0; i <= n; ++i) nodes.push_back(I.a + h * i);
  std::vector<char> moved(n + 1, 0);
  std::vector<double> extra;
  for (const auto& c : constraints)
    for (double p : c) {
      if (!(p > I.a && p < I.b)) throw InvalidInput("constraint point outside the interval");
      const int k = static_cast<int>(std::lround((p - I.a) / h));
      if (k > 0 && k < n && !moved[k] && std::abs(nodes[k] - p) < 0.25 * h) {
        nodes[k] = p;  // move the mesh node onto the constraint point
        moved[k] = 1;
      } else if (!(k > 0 && k < n && moved[k] && nodes[k] == p)) {
        extra.push_back(p);
      }
    }
  nodes.insert(nodes.end(), extra.begin(), extra.end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  const int m = static_cast<int>(nodes.size()) - 2;  // interior nodes 1..m
  // Degrees of freedom: merged groups of constrained nodes.
  std::vector<int> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
  auto node_of = [&](double p) {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), p);
    return static_cast<int>(it - nodes.begin()) - 1;
  };
  for (const auto& c : constraints) {
    const int i0 = node_of(c[0]);
    for (int k = 1; k < 3; ++k) parent[find(node_of(c[k]))] = find(i0);
  }
  std::vector<int> dof(m, -1);
  int ndof = 0;
  for (int i = 0; i < m; ++i)
    if (find(i) == i) dof[i] = ndof++;
  for (int i = 0; i < m; ++i) dof[i] = dof[find(i)];

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(ndof);
  for (int i = 1; i <= m; ++i) {
    const double hl = nodes[i] - nodes[i - 1], hr = nodes[i + 1] - nodes[i];
    const int d = dof[i - 1];
    const double pot = 2 * V_integral(nodes[i] - hl / 2, nodes[i] + hr / 2);
    trips.emplace_back(d, d, 1 / hl + 1 / hr + pot);
    mass[d] += (hl + hr) / 2;
    if (i < m) {
      const int e = dof[i];
      trips.emplace_back(d, e, -1 / hr);
      trips.emplace_back(e, d, -1 / hr);
    }
  }
  SparseMatrix A(ndof, ndof);
  A.setFromTriplets(trips.begin(), trips.end());
  SparseEigenOptions opt;
  opt.count = 1;
  opt.shift = 0;
  return smallest_eigenpairs(A, mass, opt).values[0];
}

}  // namespace detail

inline Eta1Result eta1_stratified(const IntervalIntegral& V_integral, const std::vector<std::array<double, 3>>& constraints,
                                  int n = 2048, const Interval& I = kIpi) {
  if (n < 64) throw InvalidInput("grid size must be at least 64");
  Eta1Result r;
  const double coarse = detail::eta1_solve(I, V_integral, constraints, n);
  const double fine = detail::eta1_solve(I, V_integral, constraints, 2 * n);
  r.value = coarse;
  r.extrapolated_value = richardson2(coarse, fine);
  r.error_estimate = std::abs(fine - coarse);
  r.grid_size = n;
  return r;
}

inline Eta1Result eta1_stratified(const StratifiedDecomposition& d, int n = 2048) {
  return eta1_stratified([&d](double lo, double hi) { return d.potential_integral(lo, hi); }, d.constraints(), n,
                         d.nodes[0].interval);
}

// Potential given by grid samples: dual-cell integrals by the trapezoid rule.
inline Eta1Result eta1_stratified(const GridFunction1D& V, const std::vector<std::array<double, 3>>& constraints,
                                  int n = 2048) {
  auto integral = [&V](double lo, double hi) {
    const double h = V.grid.h();
    const int k = std::max(2, static_cast<int>(std::ceil((hi - lo) / h)) * 2);
    double s = 0;
    for (int i = 0; i <= k; ++i) {
      const double w = (i == 0 || i == k) ? 0.5 : 1.0;
      s += w * V(lo + (hi - lo) * i / k);
    }
    return s * (hi - lo) / k;
  };
  return eta1_stratified(integral, constraints, n, V.grid.I);
}

// Seeded random test functions: sin^2 envelope on a support S, modulated by bumps.
inline TestFunction random_test_function(Rng& rng, const Interval& support, int grid_n = 512, int max_bumps = 4,
                                         const Interval& I = kIpi) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const int nb = rng.integer(0, max_bumps);
    std::vector<std::array<double, 3>> bumps;
    for (int k = 0; k < nb; ++k)
      bumps.push_back({rng.uniform(support.a, support.b), rng.uniform(0.5, 4.0), rng.uniform(0.03, 0.15) * support.length()});
    const Grid1D g{I, grid_n};
    GridFunction1D f{g, std::vector<double>(grid_n + 1, 0.0)};
    for (int i = 1; i < grid_n; ++i) {
      const double x = g.x(i);
      if (!support.contains(x)) continue;
      const double s = std::sin(kPi * (x - support.a) / support.length());
      double m = 1;
      for (const auto& b : bumps) m += b[1] * std::exp(-0.5 * std::pow((x - b[0]) / b[2], 2));
      f.values[i] = s * s * m;
    }
    try {
      return TestFunction::from_grid(f);
    } catch (const InvalidInput&) {
    }
  }
  throw InvalidInput("could not generate a valid test function");
}

}  // namespace gaplab
