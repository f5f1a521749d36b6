#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gaplab/common.hpp"
#include "gaplab/error.hpp"
#include "gaplab/geometry.hpp"
#include "gaplab/oned_spectral.hpp"
#include "gaplab/planar_spectral.hpp"

namespace gaplab {

inline constexpr double kEpsPart = 1e-6;
inline constexpr int kAngleSamples = 720;

enum class PartitionKind { Measure, L2 };

inline const char* to_string(PartitionKind k) { return k == PartitionKind::Measure ? "measure" : "l2"; }

// Pixel-constant fields on the mask of a grid: u, the weight p, and |grad u|^2
// by central differences (one-sided at the mask edge). Integrals over a convex
// region Q are sums of value * |pixel cap Q|, which are continuous in Q.
struct PixelFields {
  std::shared_ptr<const Grid2D> grid;
  Eigen::VectorXd u, p, grad2;
  int gradient_step = 1;

  static PixelFields make(const GridFunction2D& u, const Eigen::VectorXd& p, int gradient_step = 1) {
    PixelFields f;
    f.grid = u.grid;
    f.u = u.values;
    f.p = p;
    f.gradient_step = gradient_step;
    if (p.size() != u.values.size()) throw InvalidInput("weight and function live on different grids");
    for (int k = 0; k < p.size(); ++k)
      if (!(p[k] >= 0) || !std::isfinite(p[k])) throw DegenerateWeight("weight must be nonnegative and finite");
    f.grad2 = gradient_squared(*f.grid, f.u, gradient_step);
    return f;
  }

  static Eigen::VectorXd gradient_squared(const Grid2D& g, const Eigen::VectorXd& u, int s) {
    Eigen::VectorXd out(g.size());
    auto diff = [&](int i, int j, int di, int dj, double h) {
      int fwd = s, bwd = s;
      while (fwd > 0 && g.unknown(i + di * fwd, j + dj * fwd) < 0) --fwd;
      while (bwd > 0 && g.unknown(i - di * bwd, j - dj * bwd) < 0) --bwd;
      if (fwd + bwd == 0) return 0.0;
      const int a = g.unknown(i + di * fwd, j + dj * fwd), b = g.unknown(i - di * bwd, j - dj * bwd);
      return (u[a] - u[b]) / ((fwd + bwd) * h);
    };
    for (int k = 0; k < g.size(); ++k) {
      const int i = g.col(k), j = g.row(k);
      const double gx = diff(i, j, 1, 0, g.hx), gy = diff(i, j, 0, 1, g.hy);
      out[k] = gx * gx + gy * gy;
    }
    return out;
  }
};

namespace detail {

struct PixelPiece {
  std::vector<Point> poly;
  double area = 0;
  double up = 0, u2p = 0, g2p = 0, p = 0;  // integrand values (constant on the piece)
};

inline std::vector<PixelPiece> pixel_pieces(const ConvexPolygon& Q, const PixelFields& f) {
  const Grid2D& g = *f.grid;
  double xmin, xmax, ymin, ymax;
  Q.bbox(xmin, xmax, ymin, ymax);
  const int i0 = std::max(0, static_cast<int>(std::floor((xmin - g.x0) / g.hx)));
  const int i1 = std::min(g.nx - 1, static_cast<int>(std::floor((xmax - g.x0) / g.hx)));
  const int j0 = std::max(0, static_cast<int>(std::floor((ymin - g.y0) / g.hy)));
  const int j1 = std::min(g.ny - 1, static_cast<int>(std::floor((ymax - g.y0) / g.hy)));
  const auto& v = Q.vertices();
  std::vector<PixelPiece> out;
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      const int k = g.unknown(i, j);
      if (k < 0) continue;
      const double xa = g.x0 + i * g.hx, ya = g.y0 + j * g.hy;
      std::vector<Point> poly{{xa, ya}, {xa + g.hx, ya}, {xa + g.hx, ya + g.hy}, {xa, ya + g.hy}};
      bool inside = true;
      for (const Point& c : poly)
        if (Q.inside_distance(c) < 0) inside = false;
      if (!inside) {
        for (std::size_t e = 0; e < v.size() && poly.size() >= 3; ++e) {
          const Point ed = v[(e + 1) % v.size()] - v[e];
          const Point n = perp(ed) * (-1 / norm(ed));
          poly = clip_halfplane(poly, n, dot(n, v[e]), true);
        }
        if (poly.size() < 3) continue;
      }
      PixelPiece pc;
      pc.area = signed_area(poly);
      if (!(pc.area > 0)) continue;
      pc.poly = std::move(poly);
      pc.p = f.p[k];
      pc.up = f.u[k] * f.p[k];
      pc.u2p = f.u[k] * f.u[k] * f.p[k];
      pc.g2p = f.grad2[k] * f.p[k];
      out.push_back(std::move(pc));
    }
  return out;
}

struct Sums {
  double area = 0, p = 0, up = 0, u2p = 0, g2p = 0, abs_up = 0;
};

inline Sums integrate(const std::vector<PixelPiece>& pieces) {
  Sums s;
  for (const auto& pc : pieces) {
    s.area += pc.area;
    s.p += pc.p * pc.area;
    s.up += pc.up * pc.area;
    s.u2p += pc.u2p * pc.area;
    s.g2p += pc.g2p * pc.area;
    s.abs_up += std::abs(pc.up) * pc.area;
  }
  return s;
}

// Integrals of u p and u^2 p over {<n, x> <= t} for a fixed direction n. Pieces
// are bucketed by their largest projection (bucket width = largest piece span),
// so a query touches the prefix sums plus two buckets.
class SideIntegrator {
 public:
  SideIntegrator(const std::vector<PixelPiece>& pieces, const Point& n) : pieces_(pieces), n_(n) {
    const std::size_t m = pieces.size();
    smin_.resize(m);
    smax_.resize(m);
    double lo = 1e300, hi = -1e300;
    span_ = 0;
    for (std::size_t k = 0; k < m; ++k) {
      double a = 1e300, b = -1e300;
      for (const Point& q : pieces[k].poly) {
        const double s = dot(q, n);
        a = std::min(a, s);
        b = std::max(b, s);
      }
      smin_[k] = a;
      smax_[k] = b;
      span_ = std::max(span_, b - a);
      lo = std::min(lo, b);
      hi = std::max(hi, b);
    }
    lo_ = lo;
    span_ = std::max(span_, 1e-12 * std::max(1.0, hi - lo));
    const std::size_t nb = static_cast<std::size_t>((hi - lo) / span_) + 1;
    start_.assign(nb + 1, 0);
    for (std::size_t k = 0; k < m; ++k) ++start_[bucket(smax_[k]) + 1];
    for (std::size_t b = 0; b < nb; ++b) start_[b + 1] += start_[b];
    items_.resize(m);
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t k = 0; k < m; ++k) items_[fill[bucket(smax_[k])]++] = k;
    pre_up_.assign(nb + 1, 0);
    pre_u2p_.assign(nb + 1, 0);
    for (std::size_t b = 0; b < nb; ++b) {
      double up = 0, u2p = 0;
      for (std::size_t r = start_[b]; r < start_[b + 1]; ++r) {
        const auto& pc = pieces[items_[r]];
        up += pc.up * pc.area;
        u2p += pc.u2p * pc.area;
      }
      pre_up_[b + 1] = pre_up_[b] + up;
      pre_u2p_[b + 1] = pre_u2p_[b] + u2p;
    }
  }

  // Returns {int u p, int u^2 p} over the side <n, x> <= t.
  std::pair<double, double> below(double t) const {
    const std::size_t nb = start_.size() - 1;
    if (t < lo_ - span_) return {0.0, 0.0};
    const std::size_t bt = std::min(nb, t < lo_ ? 0 : bucket(t));
    // Buckets before bt hold pieces with smax <= t; pieces beyond bucket bt + 1
    // have smax >= t + span, hence smin >= t.
    double up = pre_up_[bt], u2p = pre_u2p_[bt];
    for (std::size_t b = bt; b < std::min(nb, bt + 2); ++b)
      for (std::size_t r = start_[b]; r < start_[b + 1]; ++r) {
        const std::size_t k = items_[r];
        const auto& pc = pieces_[k];
        if (smax_[k] <= t) {
          up += pc.up * pc.area;
          u2p += pc.u2p * pc.area;
          continue;
        }
        if (smin_[k] >= t) continue;
        const auto part = clip_halfplane(pc.poly, n_, t, true);
        if (part.size() < 3) continue;
        const double a = signed_area(part);
        up += pc.up * a;
        u2p += pc.u2p * a;
      }
    return {up, u2p};
  }

 private:
  std::size_t bucket(double s) const { return static_cast<std::size_t>(std::max(0.0, (s - lo_) / span_)); }

  const std::vector<PixelPiece>& pieces_;
  Point n_;
  std::vector<double> smin_, smax_, pre_up_, pre_u2p_;
  std::vector<std::size_t> start_, items_;
  double lo_ = 0, span_ = 0;
};

inline double area_below(const ConvexPolygon& Q, const Point& n, double t) {
  const auto part = clip_halfplane(Q.vertices(), n, t, true);
  return part.size() >= 3 ? signed_area(part) : 0.0;
}

}  // namespace detail

struct BisectResult {
  ConvexPolygon first, second;  // first = {<(cos a, sin a), x> <= offset}
  double angle = 0, offset = 0;
  double residual = 0;  // |int_first u p| / int |u| p over the cell
  bool low_confidence = false;
};

namespace detail {

struct OffsetSolution {
  double t = 0;
  double up = 0;  // int u p on the lower side
};

inline OffsetSolution balance_offset(const ConvexPolygon& Q, const std::vector<PixelPiece>& pieces, const Sums& total,
                                     double angle, PartitionKind kind) {
  const Point n = unit(angle);
  const auto [lo, hi] = projection_range(Q, n);
  const SideIntegrator integ(pieces, n);
  double a = lo, b = hi;
  const double target = kind == PartitionKind::Measure ? 0.5 * Q.area() : 0.5 * total.u2p;
  auto mass = [&](double t) { return kind == PartitionKind::Measure ? area_below(Q, n, t) : integ.below(t).second; };
  for (int it = 0; it < 60; ++it) {
    const double m = 0.5 * (a + b);
    const double v = mass(m);
    if (v < target)
      a = m;
    else
      b = m;
    if (b - a <= 1e-15 * (hi - lo)) break;
  }
  const double t = 0.5 * (a + b);
  return {t, integ.below(t).first};
}

}  // namespace detail

// Splits Q by a line such that both sides have equal area (Measure) or equal
// int u^2 p (L2) and int u p = 0 on each side.
inline BisectResult bisect_zero_mean(const ConvexPolygon& Q, const PixelFields& f, PartitionKind kind) {
  const auto pieces = detail::pixel_pieces(Q, f);
  const auto total = detail::integrate(pieces);
  if (!(total.abs_up > 0)) throw PreconditionFailed("u p vanishes on the cell");
  if (std::abs(total.up) > kEpsPart * total.abs_up)
    throw PreconditionFailed("u does not have zero weighted mean on the cell (relative " +
                             std::to_string(std::abs(total.up) / total.abs_up) + ")");
  if (kind == PartitionKind::L2 && !(total.u2p > 0)) throw PreconditionFailed("u^2 p vanishes on the cell");

  auto I = [&](double angle) { return detail::balance_offset(Q, pieces, total, angle, kind); };
  std::vector<double> values(kAngleSamples + 1);
  std::vector<double> offsets(kAngleSamples + 1);
  for (int k = 0; k <= kAngleSamples; ++k) {
    const auto s = I(kPi * k / kAngleSamples);
    values[k] = s.up;
    offsets[k] = s.t;
  }
  BisectResult r;
  int bracket = -1;
  for (int k = 0; k < kAngleSamples; ++k) {
    if (values[k] == 0) {
      bracket = k;
      break;
    }
    if ((values[k] < 0) != (values[k + 1] < 0)) {
      bracket = k;
      break;
    }
  }
  double angle, offset;
  if (bracket < 0) {
    int best = 0;
    for (int k = 1; k <= kAngleSamples; ++k)
      if (std::abs(values[k]) < std::abs(values[best])) best = k;
    angle = kPi * best / kAngleSamples;
    offset = offsets[best];
    r.low_confidence = true;
  } else if (values[bracket] == 0) {
    angle = kPi * bracket / kAngleSamples;
    offset = offsets[bracket];
  } else {
    double a = kPi * bracket / kAngleSamples, b = kPi * (bracket + 1) / kAngleSamples;
    double fa = values[bracket];
    offset = offsets[bracket];
    while (b - a > 1e-10) {
      const double m = 0.5 * (a + b);
      const auto s = I(m);
      if (s.up == 0) {
        a = b = m;
        offset = s.t;
        break;
      }
      if ((s.up < 0) == (fa < 0)) {
        a = m;
        fa = s.up;
      } else {
        b = m;
      }
    }
    angle = 0.5 * (a + b);
    offset = I(angle).t;
  }
  const auto s = I(angle);
  r.residual = std::abs(s.up) / total.abs_up;
  if (r.residual > kEpsPart) r.low_confidence = true;
  auto parts = halfplane_cut(Q, angle, offset);
  r.first = std::move(parts.first);
  r.second = std::move(parts.second);
  r.angle = angle;
  r.offset = offset;
  return r;
}

struct CellRecord {
  ConvexPolygon cell;
  int depth = 0;
  double area = 0;    // exact polygon area
  double up = 0;      // int u p (pixel quadrature)
  double abs_up = 0;  // int |u| p
  double u2p = 0;     // int u^2 p
  double g2p = 0;     // int |grad u|^2 p
  double last_angle = 0;      // normal angle of the last cut bounding the cell
  bool low_confidence = false;
};

struct Cut {
  double angle = 0, offset = 0;
  int depth = 0;
  bool low_confidence = false;
};

struct Partition {
  PartitionKind kind = PartitionKind::L2;
  std::vector<CellRecord> cells;
  std::vector<Cut> cuts;
  double total_area = 0, total_up = 0, total_u2p = 0, total_g2p = 0;

  int size() const { return static_cast<int>(cells.size()); }
  bool low_confidence() const {
    for (const auto& c : cells)
      if (c.low_confidence) return true;
    return false;
  }

  // Worst relative deviation from the defining equalities.
  double mean_defect() const {
    double w = 0;
    for (const auto& c : cells) w = std::max(w, std::abs(c.up) / c.abs_up);
    return w;
  }
  double mass_defect() const {
    const double n = static_cast<double>(cells.size());
    double w = 0;
    for (const auto& c : cells) {
      const double rel = kind == PartitionKind::Measure ? std::abs(c.area * n / total_area - 1)
                                                        : std::abs(c.u2p * n / total_u2p - 1);
      w = std::max(w, rel);
    }
    return w;
  }
};

namespace detail {

inline CellRecord make_record(const ConvexPolygon& Q, const PixelFields& f, int depth) {
  const auto s = integrate(pixel_pieces(Q, f));
  CellRecord c;
  c.cell = Q;
  c.depth = depth;
  c.area = Q.area();
  c.up = s.up;
  c.abs_up = s.abs_up;
  c.u2p = s.u2p;
  c.g2p = s.g2p;
  return c;
}

}  // namespace detail

// Shifts u by a constant so that int u p = 0 under pixel quadrature on P.
inline void center_weighted_mean(const ConvexPolygon& P, PixelFields& f) {
  const auto s = detail::integrate(detail::pixel_pieces(P, f));
  if (!(s.p > 0)) throw DegenerateWeight("weight has zero mass");
  f.u.array() -= s.up / s.p;
}

// Recursive bisection into n = 2^k cells.
inline Partition equipartition(const ConvexPolygon& P, const PixelFields& f, int n, PartitionKind kind) {
  if (n < 1 || (n & (n - 1)) != 0) throw InvalidInput("n must be a power of two");
  Partition part;
  part.kind = kind;
  auto root = detail::make_record(P, f, 0);
  if (std::abs(root.up) > kEpsPart * root.abs_up)
    throw PreconditionFailed("u does not have zero weighted mean on the domain");
  part.total_area = root.area;
  part.total_up = root.up;
  part.total_u2p = root.u2p;
  part.total_g2p = root.g2p;
  std::vector<CellRecord> level{root};
  int depth = 0;
  while (static_cast<int>(level.size()) < n) {
    ++depth;
    std::vector<CellRecord> next;
    for (const auto& c : level) {
      const auto b = bisect_zero_mean(c.cell, f, kind);
      part.cuts.push_back({b.angle, b.offset, depth, b.low_confidence});
      for (const ConvexPolygon* q : {&b.first, &b.second}) {
        auto rec = detail::make_record(*q, f, depth);
        rec.last_angle = b.angle;
        rec.low_confidence = c.low_confidence || b.low_confidence;
        next.push_back(std::move(rec));
      }
    }
    level = std::move(next);
  }
  part.cells = std::move(level);
  return part;
}

// Largest extent of a cell along the normal of the cut that last bounded it.
inline double max_cut_normal_extent(const Partition& part) {
  double w = 0;
  for (const auto& c : part.cells) {
    const auto [lo, hi] = projection_range(c.cell, unit(c.last_angle));
    w = std::max(w, hi - lo);
  }
  return w;
}

// ---------------------------------------------------------------------------

struct CellDiagnostics {
  double diameter = 0;
  Chord chord;
  std::vector<double> s, h, weight;  // samples along the diameter
  double mu1 = 0, mu1_error = 0;
  double h_min = 0, h_max = 0;       // on the central 60% of the diameter
  double affinity_residual = 0;      // max deviation from the affine fit there, relative to h_max
};

// p is evaluated at the points of the diameter chord.
inline CellDiagnostics cell_diagnostics(const ConvexPolygon& cell, const std::function<double(const Point&)>& p,
                                        int samples = 201, int n1d = 1024) {
  CellDiagnostics d;
  d.chord = diameter(cell);
  d.diameter = d.chord.length;
  const Point dir = d.chord.direction();
  const double s0 = dot(d.chord.p, dir);
  auto h = [&](double s) { return section_profile(cell, dir, s0 + s); };
  double pmax = 0;
  for (int k = 0; k < samples; ++k) pmax = std::max(pmax, p(d.chord.p + dir * (d.diameter * k / (samples - 1))));
  if (!(pmax > 0)) throw DegenerateWeight("weight vanishes along the diameter");
  auto pw = [&, pmax](double s) { return std::max(p(d.chord.p + dir * s), kWeightFloor * pmax); };
  for (int k = 0; k < samples; ++k) {
    const double s = d.diameter * k / (samples - 1);
    d.s.push_back(s);
    d.h.push_back(h(s));
    d.weight.push_back(d.h.back() * pw(s));
  }
  const Interval I{0, d.diameter};
  const auto r = neumann_weighted_eig1(I, Weight1D{I, [&](double s) { return h(s) * pw(s); }}, n1d);
  d.mu1 = r.value;
  d.mu1_error = r.tol();

  std::vector<double> cs, ch;
  for (std::size_t k = 0; k < d.s.size(); ++k)
    if (d.s[k] >= 0.2 * d.diameter && d.s[k] <= 0.8 * d.diameter) {
      cs.push_back(d.s[k]);
      ch.push_back(d.h[k]);
    }
  d.h_min = *std::min_element(ch.begin(), ch.end());
  d.h_max = *std::max_element(ch.begin(), ch.end());
  const LineFit fit = fit_line(cs, ch);
  for (std::size_t k = 0; k < cs.size(); ++k)
    d.affinity_residual = std::max(d.affinity_residual, std::abs(ch[k] - (fit.intercept + fit.slope * cs[k])));
  d.affinity_residual /= std::max(d.h_max, 1e-300);
  return d;
}

// ---------------------------------------------------------------------------

struct MeanValueReport {
  double global_rayleigh = 0;       // int |grad u|^2 p / int u^2 p
  double mean_cell_rayleigh = 0;    // (1/n) sum of the cell quotients
  double identity_defect = 0;       // relative difference of the two
  double gradient_error = 0;        // |quotient(step h) - quotient(step 2h)|
  std::vector<double> cell_mu;      // mu_1(cell, p)
  std::vector<double> cell_mu_error;
  double mean_cell_mu = 0;
  double tol = 0;
  bool identity_pass = false;
  bool inequality_pass = false;
};

// The weight is given as a function so each cell can be re-gridded.
inline MeanValueReport mean_value_bound(const Partition& part, const PixelFields& f,
                                        const std::function<double(const Point&)>& p, bool with_cell_eigenvalues = true,
                                        double cells_across = kCellsAcrossWidth) {
  if (part.kind != PartitionKind::L2) throw PreconditionFailed("mean value bound needs an L2 equipartition");
  MeanValueReport r;
  const double n = static_cast<double>(part.cells.size());
  r.global_rayleigh = part.total_g2p / part.total_u2p;
  for (const auto& c : part.cells) r.mean_cell_rayleigh += c.g2p / c.u2p / n;
  r.identity_defect = std::abs(r.mean_cell_rayleigh - r.global_rayleigh) / r.global_rayleigh;
  r.identity_pass = r.identity_defect < kEpsPart;

  PixelFields coarse = f;
  coarse.grad2 = PixelFields::gradient_squared(*f.grid, f.u, 2 * f.gradient_step);
  coarse.gradient_step = 2 * f.gradient_step;
  double g2_coarse = 0, u2 = 0;
  for (const auto& c : part.cells) {
    const auto s = detail::integrate(detail::pixel_pieces(c.cell, coarse));
    g2_coarse += s.g2p;
    u2 += s.u2p;
  }
  r.gradient_error = std::abs(g2_coarse / u2 - r.global_rayleigh);

  if (with_cell_eigenvalues) {
    double err = 0;
    for (const auto& c : part.cells) {
      Solve2DOptions opt;
      opt.delta = width(c.cell) / cells_across;
      const auto e = weighted_neumann_eig1(c.cell, weight_from_function(p), opt);
      r.cell_mu.push_back(e.value);
      r.cell_mu_error.push_back(e.error_estimate);
      r.mean_cell_mu += e.value / n;
      err += e.error_estimate / n;
    }
    r.tol = 3 * (err + r.gradient_error);
    r.inequality_pass = r.mean_cell_mu <= r.global_rayleigh + r.tol;
  }
  return r;
}

// ---------------------------------------------------------------------------

struct SectionBoundReport {
  bool skipped = false;
  std::string note;
  double width = 0, diameter = 0, area = 0;
  std::vector<double> max_section;  // per cell, orthogonal to the domain diameter
  std::vector<double> cell_area;
  double lambda_fit = 0;        // min over cells of max_section * n / w
  double lambda_area_fit = 0;   // min over cells of |cell| * n / |P|
  bool pass = false;
};

inline SectionBoundReport section_lower_bound_check(const Partition& part, const ConvexPolygon& P) {
  SectionBoundReport r;
  const Chord c = diameter(P);
  r.width = width(P);
  r.diameter = c.length;
  r.area = P.area();
  if (r.width > std::sqrt(3.0) / 2 * r.diameter) {
    r.skipped = true;
    r.note = "width exceeds sqrt(3)/2 times the diameter";
    return r;
  }
  const Point dir = c.direction();
  const double n = static_cast<double>(part.cells.size());
  r.lambda_fit = 1e300;
  r.lambda_area_fit = 1e300;
  for (const auto& cell : part.cells) {
    double best = 0;
    for (const Point& v : cell.cell.vertices()) best = std::max(best, section_profile(cell.cell, dir, dot(v, dir)));
    r.max_section.push_back(best);
    r.cell_area.push_back(cell.area);
    r.lambda_fit = std::min(r.lambda_fit, best * n / r.width);
    r.lambda_area_fit = std::min(r.lambda_area_fit, cell.area * n / r.area);
  }
  r.pass = r.lambda_fit > 0 && r.lambda_area_fit > 0;
  return r;
}

// ---------------------------------------------------------------------------
// Fields used by the gap experiments: u = u2 / u1 with weight u1^2.

struct GroundStateFields {
  std::vector<EigenPair2D> eigen;  // u1, u2
  PixelFields fields;
  GridFunction2D weight;  // u1^2
};

inline GroundStateFields quotient_fields(const ConvexPolygon& P, const Solve2DOptions& opt = {}) {
  GroundStateFields out;
  Solve2DOptions o = opt;
  o.two_grid = false;
  out.eigen = dirichlet_eigs(P, 2, o);
  const auto& u1 = out.eigen[0].function;
  const auto& u2 = out.eigen[1].function;
  const double cut = kQuotientCutoff * u1.values.maxCoeff();
  GridFunction2D q{u1.grid, Eigen::VectorXd::Zero(u1.values.size())};
  for (int k = 0; k < q.values.size(); ++k)
    if (u1.values[k] > cut) q.values[k] = u2.values[k] / u1.values[k];
  out.weight = {u1.grid, u1.values.cwiseProduct(u1.values)};
  out.fields = PixelFields::make(q, out.weight.values);
  center_weighted_mean(P, out.fields);
  out.fields.grad2 = PixelFields::gradient_squared(*out.fields.grid, out.fields.u, 1);
  return out;
}

}  // namespace gaplab
