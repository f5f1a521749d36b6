#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gaplab/common.hpp"
#include "gaplab/error.hpp"
#include "gaplab/geometry.hpp"
#include "gaplab/oned_spectral.hpp"
#include "gaplab/planar_spectral.hpp"

namespace gaplab {

inline constexpr double kNondegenerateAspect = 0.02;  // w / D at or above which strict excess is asserted

enum class Compare { AtLeast, Above, AtMost };

inline const char* to_string(Compare c) {
  switch (c) {
    case Compare::AtLeast: return ">=";
    case Compare::Above: return ">";
    case Compare::AtMost: return "<=";
  }
  return "?";
}

// AtLeast: value >= bound - tol; Above: value > bound + tol; AtMost: value <= bound + tol.
struct Check {
  std::string name;
  double value = 0;
  double bound = 0;
  double tol = 0;
  bool asserted = true;
  bool pass = false;
  Compare compare = Compare::AtLeast;

  static Check make(std::string name, double value, double bound, double tol, Compare c = Compare::AtLeast,
                    bool asserted = true) {
    Check k{std::move(name), value, bound, tol, asserted, false, c};
    k.evaluate();
    return k;
  }

  void evaluate() {
    switch (compare) {
      case Compare::AtLeast: pass = value >= bound - tol; break;
      case Compare::Above: pass = value > bound + tol; break;
      case Compare::AtMost: pass = value <= bound + tol; break;
    }
  }
};

struct GapReport {
  std::string domain;
  double D = 0, w = 0, eta = 0, a1 = 0, a2 = 0;
  double delta = 0;
  bool has_dirichlet = false, has_neumann = false;
  double lambda1 = 0, lambda1_error = 0, lambda2 = 0, lambda2_error = 0;
  double gap = 0, gap_error = 0;
  double gap_floor = 0, gap_excess = 0;
  double implied_cbar = 0;  // gap_excess D^8 / w^6
  double mu1 = 0, mu1_error = 0;
  double neumann_floor = 0, neumann_excess = 0;
  double implied_neumann = 0;  // neumann_excess D^4 / a2^2
  bool nondegenerate = false;
  std::vector<Check> checks;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.asserted || c.pass; });
  }
};

namespace detail {

inline void fill_geometry(GapReport& r, const ConvexPolygon& P, const Solve2DOptions& opt) {
  const Chord c = diameter(P);
  r.D = c.length;
  r.w = width(P);
  r.eta = depth(P, c);
  const Ellipse E = john_ellipse(P);
  r.a1 = E.a1;
  r.a2 = E.a2;
  r.delta = opt.delta > 0 ? opt.delta : default_delta(P);
  r.nondegenerate = r.w / r.D >= kNondegenerateAspect;
}

}  // namespace detail

// Dirichlet gap against 3 pi^2 / D^2, and strict excess on nondegenerate domains.
// Eigenvalues are Richardson-extrapolated from the two grids; tol = 3 x the
// two-grid change of the gap.
inline GapReport verify_gap(const ConvexPolygon& P, const Solve2DOptions& opt = {}, std::string id = {}) {
  GapReport r;
  r.domain = std::move(id);
  detail::fill_geometry(r, P, opt);
  Solve2DOptions o = opt;
  o.two_grid = true;
  const auto e = dirichlet_eigs(P, 2, o);
  r.has_dirichlet = true;
  r.lambda1 = e[0].extrapolated();
  r.lambda2 = e[1].extrapolated();
  r.lambda1_error = e[0].error_estimate;
  r.lambda2_error = e[1].error_estimate;
  r.gap = r.lambda2 - r.lambda1;
  r.gap_error = std::abs((e[1].value - e[0].value) - (e[1].coarse_value - e[0].coarse_value));
  r.gap_floor = 3 * kPi * kPi / (r.D * r.D);
  r.gap_excess = r.gap - r.gap_floor;
  r.implied_cbar = r.gap_excess * std::pow(r.D, 8) / std::pow(r.w, 6);
  const double tol = 3 * r.gap_error;
  r.checks.push_back(Check::make("gap_floor", r.gap, r.gap_floor, tol));
  r.checks.push_back(Check::make("gap_strict_excess", r.gap_excess, 0, tol, Compare::Above, r.nondegenerate));
  return r;
}

// Neumann mu_1 against pi^2 / D^2.
inline GapReport verify_neumann(const ConvexPolygon& P, const Solve2DOptions& opt = {}, std::string id = {}) {
  GapReport r;
  r.domain = std::move(id);
  detail::fill_geometry(r, P, opt);
  Solve2DOptions o = opt;
  o.two_grid = true;
  const auto e = neumann_eig1(P, o);
  r.has_neumann = true;
  r.mu1 = e.extrapolated();
  r.mu1_error = e.error_estimate;
  r.neumann_floor = kPi * kPi / (r.D * r.D);
  r.neumann_excess = r.mu1 - r.neumann_floor;
  r.implied_neumann = r.neumann_excess * std::pow(r.D, 4) / (r.a2 * r.a2);
  const double tol = 3 * r.mu1_error;
  r.checks.push_back(Check::make("neumann_floor", r.mu1, r.neumann_floor, tol));
  return r;
}

// ---------------------------------------------------------------------------
// Thin rectangles (0, pi) x (0, eps): (mu_1 - pi^2/D^2) / eps^2 against pi^2 / D^4.

struct ExpansionEntry {
  double eps = 0;
  double D = 0;
  double mu1 = 0, mu1_error = 0;
  double excess = 0;
  double normalized = 0;  // excess / eps^2
  double predicted = 0;   // pi^2 / D^4
  double rel_diff = 0;
};

struct ExpansionReport {
  std::vector<ExpansionEntry> entries;
  double tolerance = 0.05;
  bool pass = false;  // last (smallest) eps within tolerance
};

inline ExpansionReport neumann_expansion(const std::vector<double>& eps_seq, double cells_across = 16) {
  ExpansionReport r;
  for (double eps : eps_seq) {
    const auto P = make_rectangle(kPi, eps);
    Solve2DOptions o;
    o.delta = eps / cells_across;
    const auto e = neumann_eig1(P, o);
    ExpansionEntry x;
    x.eps = eps;
    x.D = std::hypot(kPi, eps);
    x.mu1 = e.extrapolated();
    x.mu1_error = e.error_estimate;
    x.excess = x.mu1 - kPi * kPi / (x.D * x.D);
    x.normalized = x.excess / (eps * eps);
    x.predicted = kPi * kPi / std::pow(x.D, 4);
    x.rel_diff = std::abs(x.normalized - x.predicted) / x.predicted;
    r.entries.push_back(x);
  }
  r.pass = !r.entries.empty() && r.entries.back().rel_diff <= r.tolerance;
  return r;
}

// ---------------------------------------------------------------------------
// Domain families indexed by a width-like parameter.

struct Family {
  std::string name;
  std::function<ConvexPolygon(double)> make;
  std::vector<double> params;
};

// Affine compression y -> s y.
inline ConvexPolygon squash(const ConvexPolygon& P, double s) {
  std::vector<Point> v = P.vertices();
  for (auto& p : v) p.y *= s;
  return ConvexPolygon::make(v);
}

inline Family make_family(const std::string& name, std::uint64_t seed = 1) {
  if (name == "rects") return {name, [](double e) { return make_rectangle(kPi, e); }, {0.4, 0.2, 0.1, 0.05}};
  if (name == "sectors")
    return {name, [](double a) { return make_sector(a); }, {kPi / 4, kPi / 8, kPi / 16, kPi / 32}};
  if (name == "ngons") return {name, [](double s) { return squash(make_ngon(6), s); }, {1, 0.5, 0.25, 0.125}};
  if (name == "random")
    return {name, [seed](double s) { return squash(make_random_polygon(8, seed), s); }, {1, 0.5, 0.25, 0.125}};
  throw InvalidInput("unknown family '" + name + "' (rects, sectors, ngons, random)");
}

enum class SweepKind { Dirichlet, Neumann };

inline const char* to_string(SweepKind k) { return k == SweepKind::Dirichlet ? "dirichlet" : "neumann"; }

struct SweepOptions {
  double cells_across = 16;
  int jobs = 1;
};

struct FitReport {
  std::string family;
  SweepKind kind = SweepKind::Dirichlet;
  std::vector<double> params;
  std::vector<GapReport> members;  // sorted by parameter
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  int fitted_points = 0;
  double min_implied = std::numeric_limits<double>::infinity();  // empirical constant
  bool slope_asserted = false;
  double slope_target = 2, slope_tolerance = 0.1;
  bool pass = true;
};

// Runs f(i) for i in [0, n) on `jobs` threads; results are written by index.
inline void parallel_for(int n, int jobs, const std::function<void(int)>& f) {
  jobs = std::clamp(jobs, 1, std::max(1, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i; (i = next++) < n;) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Least-squares slope of log(excess) against log(width). The slope is asserted
// (2 +- 0.1) only for the rectangle family; other families are reported.
inline FitReport exponent_sweep(const Family& fam, SweepKind kind, const SweepOptions& so = {}) {
  if (fam.params.size() < 4)
    throw FitUnderdetermined("family '" + fam.name + "' has " + std::to_string(fam.params.size()) +
                             " points, at least 4 are needed");
  FitReport r;
  r.family = fam.name;
  r.kind = kind;
  r.params = fam.params;
  std::sort(r.params.begin(), r.params.end());
  r.members.resize(r.params.size());
  parallel_for(static_cast<int>(r.params.size()), so.jobs, [&](int i) {
    const auto P = fam.make(r.params[i]);
    Solve2DOptions o;
    o.delta = width(P) / so.cells_across;
    const std::string id = fam.name + ":" + std::to_string(r.params[i]);
    r.members[i] = kind == SweepKind::Dirichlet ? verify_gap(P, o, id) : verify_neumann(P, o, id);
  });
  std::vector<double> lx, ly;
  for (const auto& m : r.members) {
    r.pass = r.pass && m.pass();
    const double ex = kind == SweepKind::Dirichlet ? m.gap_excess : m.neumann_excess;
    const double implied = kind == SweepKind::Dirichlet ? m.implied_cbar : m.implied_neumann;
    r.min_implied = std::min(r.min_implied, implied);
    if (ex > 0) {
      lx.push_back(std::log(m.w));
      ly.push_back(std::log(ex));
    }
  }
  r.fitted_points = static_cast<int>(lx.size());
  if (lx.size() >= 2) {
    const auto fit = fit_line(lx, ly);
    r.slope = fit.slope;
    r.intercept = fit.intercept;
  }
  r.slope_asserted = fam.name == "rects";
  if (r.slope_asserted)
    r.pass = r.pass && r.fitted_points >= 4 && std::abs(r.slope - r.slope_target) <= r.slope_tolerance;
  return r;
}

// ---------------------------------------------------------------------------
// Localized inequality along a chord: mu_1(chord, h u_1^2) >= 3 pi^2 / D^2.

struct LocalizedReport {
  Chord chord;
  double D = 0;
  double mu = 0;
  double mu_error = 0;      // 1D discretization tolerance
  double weight_change = 0; // |mu(u_1 at spacing delta) - mu(u_1 at 2 delta)|
  double tol = 0;
  double bound = 0;
  double excess = 0;
  double implied_C = std::numeric_limits<double>::quiet_NaN();  // excess D^5 / (D - d)^3
  Interval support;  // part of the chord where u_1 exceeds the cutoff
  bool pass = false;
};

// First Dirichlet eigenfunction on the fine grid and on the doubled grid.
struct LocalizedContext {
  ConvexPolygon P;
  double D = 0;
  GridFunction2D fine, coarse;

  static LocalizedContext make(const ConvexPolygon& P, const Solve2DOptions& opt = {}) {
    const double delta = opt.delta > 0 ? opt.delta : default_delta(P);
    auto g = std::make_shared<const Grid2D>(Grid2D::make(P, delta));
    auto gc = std::make_shared<const Grid2D>(Grid2D::make(P, 2 * delta));
    LocalizedContext c{P, diameter(P).length, {g, detail::dirichlet_on_grid(*g, 1, opt.potential, opt.seed).vectors[0]},
                       {gc, detail::dirichlet_on_grid(*gc, 1, opt.potential, opt.seed).vectors[0]}};
    detail::fix_sign(c.fine.values, true);
    detail::fix_sign(c.coarse.values, true);
    return c;
  }
};

namespace detail {

// Bilinear interpolation away from the boundary. Where some of the four
// surrounding centres are off the mask, each on-mask value is scaled by the ratio
// of distances to the boundary (u vanishes linearly there) and the bilinear
// weights are renormalized.
inline double eval_vanishing(const GridFunction2D& u, const ConvexPolygon& P, const Point& x) {
  const Grid2D& g = *u.grid;
  const double fx = (x.x - g.x0) / g.hx - 0.5, fy = (x.y - g.y0) / g.hy - 0.5;
  const int i = static_cast<int>(std::floor(fx)), j = static_cast<int>(std::floor(fy));
  const double tx = fx - i, ty = fy - j;
  const double dx = std::max(0.0, P.inside_distance(x));
  double num = 0, den = 0;
  bool all = true;
  for (int b = 0; b < 4; ++b) {
    const int ii = i + (b & 1), jj = j + (b >> 1);
    const double wgt = ((b & 1) ? tx : 1 - tx) * ((b >> 1) ? ty : 1 - ty);
    const int k = g.unknown(ii, jj);
    if (k < 0) {
      all = false;
      continue;
    }
    const double dc = P.inside_distance(g.center(ii, jj));
    num += wgt * u.values[k] * std::min(1.0, dx / dc);
    den += wgt;
  }
  if (all) return u(x);
  return den > 0 ? num / den : 0.0;
}

inline EigenResult1D chord_mu(const GridFunction2D& u, const ConvexPolygon& P, const Chord& c, const Interval& J,
                              const std::function<double(double)>& h, int n) {
  const Point e = c.direction();
  const Point a = c.p;
  const double top = u.max_abs();
  Weight1D p{J, [&u, &P, e, a, h, top](double t) {
               const double v = eval_vanishing(u, P, a + e * t) / top;
               return h(t) * v * v;
             }};
  return neumann_weighted_eig1(J, p, n);
}

// Part of [0, d] where u exceeds kQuotientCutoff * max |u|, from `samples` probes.
inline Interval positive_support(const GridFunction2D& u, const ConvexPolygon& P, const Chord& c,
                                 int samples = 4096) {
  const Point e = c.direction();
  const double cut = kQuotientCutoff * u.max_abs();
  double lo = c.length, hi = 0;
  for (int k = 0; k <= samples; ++k) {
    const double t = c.length * k / samples;
    if (eval_vanishing(u, P, c.p + e * t) > cut) {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  if (!(hi > lo)) throw InvalidChord("first eigenfunction vanishes along the chord");
  return {lo, hi};
}

}  // namespace detail

// h is given on [0, d] (arclength from chord.p) and must be positive and (1/m)-concave.
inline LocalizedReport verify_localized(const LocalizedContext& ctx, const Chord& chord,
                                        const std::function<double(double)>& h, double m = 1, int n1d = 1024) {
  if (!(chord.length > 0)) throw InvalidChord("chord has zero length");
  const double tol_in = 1e-9 * ctx.P.scale();
  if (!ctx.P.contains(chord.p, tol_in) || !ctx.P.contains(chord.q, tol_in)) throw InvalidChord("chord leaves the domain");
  if (!(m > 0)) throw InvalidInput("concavity exponent must be positive");
  const Interval full{0, chord.length};
  for (int k = 1; k < 64; ++k)
    if (!(h(chord.length * k / 64) > 0)) throw PreconditionFailed("chord weight must be positive");
  if (!is_power_concave(Weight1D{full, h}, m)) throw PreconditionFailed("chord weight is not (1/m)-concave");

  LocalizedReport r;
  r.chord = chord;
  r.D = ctx.D;
  r.support = detail::positive_support(ctx.fine, ctx.P, chord);
  const auto fine = detail::chord_mu(ctx.fine, ctx.P, chord, r.support, h, n1d);
  const auto coarse = detail::chord_mu(ctx.coarse, ctx.P, chord, r.support, h, n1d);
  r.mu = fine.extrapolated_value;
  r.mu_error = fine.tol();
  r.weight_change = std::abs(fine.extrapolated_value - coarse.extrapolated_value);
  r.tol = r.mu_error + 3 * r.weight_change;
  r.bound = 3 * kPi * kPi / (r.D * r.D);
  r.excess = r.mu - r.bound;
  const double gap = r.D - chord.length;
  if (gap > 1e-12 * r.D) r.implied_C = r.excess * std::pow(r.D, 5) / (gap * gap * gap);
  r.pass = r.mu >= r.bound - r.tol;
  return r;
}

inline LocalizedReport verify_localized(const ConvexPolygon& P, const Chord& chord,
                                        const std::function<double(double)>& h, double m = 1,
                                        const Solve2DOptions& opt = {}) {
  return verify_localized(LocalizedContext::make(P, opt), chord, h, m);
}

// Chord between two uniformly random boundary points on different edges, of
// length at least min_fraction * D.
inline Chord random_chord(const ConvexPolygon& P, Rng& rng, double min_fraction = 0.2) {
  const auto& v = P.vertices();
  const int k = static_cast<int>(v.size());
  std::vector<double> cum(k + 1, 0);
  for (int i = 0; i < k; ++i) cum[i + 1] = cum[i] + dist(v[i], v[(i + 1) % k]);
  const double D = diameter(P).length;
  auto point = [&](double s, int& edge) {
    edge = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), s) - cum.begin()) - 1;
    edge = std::clamp(edge, 0, k - 1);
    const double t = (s - cum[edge]) / (cum[edge + 1] - cum[edge]);
    return v[edge] + (v[(edge + 1) % k] - v[edge]) * t;
  };
  for (int attempt = 0; attempt < 10000; ++attempt) {
    int e1, e2;
    const Point a = point(rng.uniform(0, cum[k]), e1);
    const Point b = point(rng.uniform(0, cum[k]), e2);
    if (e1 == e2 || dist(a, b) < min_fraction * D) continue;
    return Chord{a, b, dist(a, b)};
  }
  throw InvalidInput("could not draw a chord");
}

struct LocalizedSweep {
  std::vector<LocalizedReport> chords;
  int violations = 0;
  double min_implied_C = std::numeric_limits<double>::infinity();
  double min_excess = std::numeric_limits<double>::infinity();
};

// Random chords with h = 1.
inline LocalizedSweep localized_sweep(const ConvexPolygon& P, int count, std::uint64_t seed,
                                      const Solve2DOptions& opt = {}) {
  const auto ctx = LocalizedContext::make(P, opt);
  Rng rng(seed);
  LocalizedSweep s;
  for (int i = 0; i < count; ++i) {
    const auto r = verify_localized(ctx, random_chord(P, rng), [](double) { return 1.0; });
    if (!r.pass) ++s.violations;
    if (std::isfinite(r.implied_C)) s.min_implied_C = std::min(s.min_implied_C, r.implied_C);
    s.min_excess = std::min(s.min_excess, r.excess);
    s.chords.push_back(r);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Diamond |x| + |y| < 1 with V = (1/delta) (|y| - eps)^+.

struct SchrodingerReport {
  double delta = 0, eps = 0;
  double lambda1 = 0, lambda2 = 0;
  double gap = 0, gap_error = 0;
  double floor = 3 * kPi * kPi / 4;  // 3 pi^2 / D^2 with D = 2
  double strip_upper = 0;            // gap bound for the strip |y| < eps in the limit delta -> 0
  double excess = 0;
};

// Gap bound of the truncated diamond from the inscribed and enclosing rectangles.
inline double diamond_strip_upper(double eps) { return kPi * kPi / ((1 - eps) * (1 - eps)) - kPi * kPi / 4; }

// delta = infinity removes the potential.
inline SchrodingerReport schrodinger_counterexample(double delta, double eps, const Solve2DOptions& opt = {}) {
  if (!(delta > 0)) throw InvalidInput("delta must be positive");
  if (!(eps > 0 && eps <= 1)) throw InvalidInput("eps must lie in (0, 1]");
  const auto P = make_diamond();
  Solve2DOptions o = opt;
  o.two_grid = true;
  const double inv = std::isinf(delta) ? 0.0 : 1 / delta;
  if (inv > 0) o.potential = [inv, eps](const Point& p) { return inv * std::max(0.0, std::abs(p.y) - eps); };
  const auto e = dirichlet_eigs(P, 2, o);
  SchrodingerReport r;
  r.delta = delta;
  r.eps = eps;
  r.lambda1 = e[0].extrapolated();
  r.lambda2 = e[1].extrapolated();
  r.gap = r.lambda2 - r.lambda1;
  r.gap_error = std::abs((e[1].value - e[0].value) - (e[1].coarse_value - e[0].coarse_value));
  r.strip_upper = eps < 1 ? diamond_strip_upper(eps) : std::numeric_limits<double>::infinity();
  r.excess = r.gap - r.floor;
  return r;
}

}  // namespace gaplab
