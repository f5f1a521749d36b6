#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gaplab/common.hpp"
#include "gaplab/error.hpp"

namespace gaplab {

inline constexpr double kEpsGeom = 1e-9;

struct Point {
  double x = 0, y = 0;

  Point operator+(const Point& o) const { return {x + o.x, y + o.y}; }
  Point operator-(const Point& o) const { return {x - o.x, y - o.y}; }
  Point operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Point&) const = default;
};

inline double dot(const Point& a, const Point& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Point& a, const Point& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Point& a) { return std::hypot(a.x, a.y); }
inline double dist(const Point& a, const Point& b) { return norm(a - b); }
inline Point perp(const Point& a) { return {-a.y, a.x}; }
inline Point unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

inline double signed_area(const std::vector<Point>& v) {
  double s = 0;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) s += cross(v[i], v[(i + 1) % n]);
  return 0.5 * s;
}

class ConvexPolygon {
 public:
  ConvexPolygon() = default;

  // Validates and normalizes: counterclockwise order, duplicate and collinear
  // vertices removed (within kEpsGeom relative to the polygon size).
  static ConvexPolygon make(std::vector<Point> pts) {
    if (pts.size() < 3) throw DegenerateDomain("polygon needs at least three vertices");
    for (const Point& p : pts)
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidInput("non-finite vertex");
    if (signed_area(pts) < 0) std::reverse(pts.begin(), pts.end());
    double scale = 0;
    for (const Point& p : pts) scale = std::max(scale, dist(p, pts[0]));
    if (!(scale > 0)) throw DegenerateDomain("polygon has zero extent");
    // Remove duplicates and collinear vertices until stable.
    bool changed = true;
    while (changed && pts.size() >= 3) {
      changed = false;
      for (std::size_t i = 0; i < pts.size() && pts.size() >= 3; ++i) {
        const std::size_t n = pts.size();
        const Point& a = pts[(i + n - 1) % n];
        const Point& b = pts[i];
        const Point& c = pts[(i + 1) % n];
        const Point e1 = b - a, e2 = c - b;
        const bool dup = norm(e1) <= kEpsGeom * scale;
        const bool collinear = std::abs(cross(e1, e2)) <= kEpsGeom * norm(e1) * norm(e2) && dot(e1, e2) > 0;
        if (dup || collinear) {
          pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
          changed = true;
          --i;
        }
      }
    }
    if (pts.size() < 3) throw DegenerateDomain("polygon collapses to a segment");
    ConvexPolygon P;
    P.v_ = std::move(pts);
    const double area = P.area();
    if (!(area > kEpsGeom * scale * scale)) throw DegenerateDomain("polygon area below tolerance");
    for (std::size_t i = 0, n = P.v_.size(); i < n; ++i) {
      const Point e1 = P.v_[(i + 1) % n] - P.v_[i];
      const Point e2 = P.v_[(i + 2) % n] - P.v_[(i + 1) % n];
      if (!(cross(e1, e2) > kEpsGeom * norm(e1) * norm(e2))) throw InvalidInput("polygon is not strictly convex");
    }
    return P;
  }

  const std::vector<Point>& vertices() const { return v_; }
  std::size_t size() const { return v_.size(); }
  const Point& operator[](std::size_t i) const { return v_[i % v_.size()]; }

  double area() const { return signed_area(v_); }

  Point centroid() const {
    double cx = 0, cy = 0, a = 0;
    for (std::size_t i = 0, n = v_.size(); i < n; ++i) {
      const Point& p = v_[i];
      const Point& q = v_[(i + 1) % n];
      const double c = cross(p, q);
      a += c;
      cx += (p.x + q.x) * c;
      cy += (p.y + q.y) * c;
    }
    return {cx / (3 * a), cy / (3 * a)};
  }

  void bbox(double& xmin, double& xmax, double& ymin, double& ymax) const {
    xmin = ymin = 1e300;
    xmax = ymax = -1e300;
    for (const Point& p : v_) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }

  double scale() const {
    double xmin, xmax, ymin, ymax;
    bbox(xmin, xmax, ymin, ymax);
    return std::hypot(xmax - xmin, ymax - ymin);
  }

  // Signed distance to edge line i (positive inside).
  double edge_distance(std::size_t i, const Point& p) const {
    const Point& a = v_[i];
    const Point& b = v_[(i + 1) % v_.size()];
    return cross(b - a, p - a) / dist(a, b);
  }

  // Minimum over edges of the signed distance (positive strictly inside).
  double inside_distance(const Point& p) const {
    double d = 1e300;
    for (std::size_t i = 0; i < v_.size(); ++i) d = std::min(d, edge_distance(i, p));
    return d;
  }

  bool contains(const Point& p, double eps = 0) const { return inside_distance(p) >= -eps; }

  ConvexPolygon translated(const Point& d) const {
    ConvexPolygon P = *this;
    for (Point& p : P.v_) p = p + d;
    return P;
  }

  ConvexPolygon scaled(double s) const {
    ConvexPolygon P = *this;
    for (Point& p : P.v_) p = p * s;
    return P;
  }

 private:
  std::vector<Point> v_;
};

struct Chord {
  Point p, q;
  double length = 0;

  Point direction() const { return (q - p) * (1 / length); }
  Point midpoint() const { return (p + q) * 0.5; }
};

struct Ellipse {
  Point center;
  double a1 = 0, a2 = 0;     // semi-axes, a1 >= a2
  double orientation = 0;    // angle of the a1 axis in [0, pi)

  Point boundary(double t) const {
    const Point u = unit(orientation), w = perp(u);
    return center + u * (a1 * std::cos(t)) + w * (a2 * std::sin(t));
  }

  // Value of the quadratic form: <= 1 inside.
  double level(const Point& p) const {
    const Point u = unit(orientation), w = perp(u);
    const Point d = p - center;
    const double s = dot(d, u) / a1, t = dot(d, w) / a2;
    return s * s + t * t;
  }
};

// Vertex pair at maximal distance; ties resolved by the first pair in vertex order.
inline Chord diameter(const ConvexPolygon& P) {
  const auto& v = P.vertices();
  double best = -1;
  std::size_t bi = 0, bj = 1;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      const double d = dist(v[i], v[j]);
      if (d > best * (1 + 1e-12)) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  return {v[bi], v[bj], best};
}

struct WidthResult {
  double width = 0;
  Point normal;  // unit normal of the supporting lines
};

inline WidthResult width_detail(const ConvexPolygon& P) {
  const auto& v = P.vertices();
  WidthResult best{1e300, {}};
  for (std::size_t i = 0; i < v.size(); ++i) {
    double far = 0;
    for (std::size_t j = 0; j < v.size(); ++j) far = std::max(far, P.edge_distance(i, v[j]));
    if (far < best.width) {
      const Point e = v[(i + 1) % v.size()] - v[i];
      best = {far, perp(e) * (1 / norm(e))};
    }
  }
  return best;
}

inline double width(const ConvexPolygon& P) { return width_detail(P).width; }

// Length of the slice {p : <p, direction> = x}; 0 outside the projection range.
inline double section_profile(const ConvexPolygon& P, const Point& direction, double x) {
  const Point d = direction * (1 / norm(direction));
  const Point n = perp(d);
  const auto& v = P.vertices();
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % v.size()];
    const double sa = dot(a, d) - x, sb = dot(b, d) - x;
    if (sa == 0) {
      lo = std::min(lo, dot(a, n));
      hi = std::max(hi, dot(a, n));
    }
    if ((sa < 0 && sb > 0) || (sa > 0 && sb < 0)) {
      const double t = sa / (sa - sb);
      const double s = dot(a + (b - a) * t, n);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  return hi > lo ? hi - lo : 0.0;
}

// Projection range of P onto a direction.
inline std::pair<double, double> projection_range(const ConvexPolygon& P, const Point& direction) {
  const Point d = direction * (1 / norm(direction));
  double lo = 1e300, hi = -1e300;
  for (const Point& p : P.vertices()) {
    lo = std::min(lo, dot(p, d));
    hi = std::max(hi, dot(p, d));
  }
  return {lo, hi};
}

// Maximal length of sections orthogonal to the chord direction.
inline double depth(const ConvexPolygon& P, const Chord& diam) {
  if (!(diam.length > 0)) throw InvalidChord("chord has zero length");
  const double eps = kEpsGeom * P.scale();
  if (!P.contains(diam.p, eps) || !P.contains(diam.q, eps)) throw InvalidChord("chord not contained in the polygon");
  const Point d = diam.direction();
  double best = 0;
  for (const Point& p : P.vertices()) best = std::max(best, section_profile(P, d, dot(p, d)));
  return best;
}

// ---------------------------------------------------------------------------
// Maximal-area inscribed ellipse {B u + c : |u| <= 1}: barrier method on
// -log det B subject to |B a_i| + a_i . c <= b_i for every edge. The barrier
// weight mu is driven to zero; m * mu bounds the gap in log det.

namespace detail {

struct JohnProblem {
  std::vector<Point> a;  // outward unit normals
  std::vector<double> b;

  // x = (b11, b12, b22, c1, c2)
  bool feasible(const Eigen::Matrix<double, 5, 1>& x) const {
    const double det = x[0] * x[2] - x[1] * x[1];
    if (!(x[0] > 0 && det > 0)) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!(slack(x, i) > 0)) return false;
    return true;
  }

  double slack(const Eigen::Matrix<double, 5, 1>& x, std::size_t i) const {
    const double ba1 = x[0] * a[i].x + x[1] * a[i].y, ba2 = x[1] * a[i].x + x[2] * a[i].y;
    return b[i] - (a[i].x * x[3] + a[i].y * x[4]) - std::hypot(ba1, ba2);
  }

  double value(const Eigen::Matrix<double, 5, 1>& x, double mu) const {
    const double det = x[0] * x[2] - x[1] * x[1];
    double f = -std::log(det);
    for (std::size_t i = 0; i < a.size(); ++i) f -= mu * std::log(slack(x, i));
    return f;
  }

  Eigen::Matrix<double, 5, 1> gradient(const Eigen::Matrix<double, 5, 1>& x, double mu) const {
    Eigen::Matrix<double, 5, 1> g = Eigen::Matrix<double, 5, 1>::Zero();
    const double det = x[0] * x[2] - x[1] * x[1];
    g[0] = -x[2] / det;
    g[1] = 2 * x[1] / det;
    g[2] = -x[0] / det;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double s = slack(x, i) / mu;
      const double ba1 = x[0] * a[i].x + x[1] * a[i].y, ba2 = x[1] * a[i].x + x[2] * a[i].y;
      const double nb = std::hypot(ba1, ba2);
      const double w1 = ba1 / nb, w2 = ba2 / nb;
      g[0] += w1 * a[i].x / s;
      g[1] += (w1 * a[i].y + w2 * a[i].x) / s;
      g[2] += w2 * a[i].y / s;
      g[3] += a[i].x / s;
      g[4] += a[i].y / s;
    }
    return g;
  }

  Eigen::Matrix<double, 5, 5> hessian(const Eigen::Matrix<double, 5, 1>& x, double mu) const {
    Eigen::Matrix<double, 5, 5> H = Eigen::Matrix<double, 5, 5>::Zero();
    const double det = x[0] * x[2] - x[1] * x[1];
    const Eigen::Vector3d gd(x[2], -2 * x[1], x[0]);
    Eigen::Matrix3d hd;
    hd << 0, 0, 1, 0, -2, 0, 1, 0, 0;
    H.topLeftCorner<3, 3>() = gd * gd.transpose() / (det * det) - hd / det;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double s = slack(x, i);
      Eigen::Matrix<double, 2, 3> D;
      D << a[i].x, a[i].y, 0, 0, a[i].x, a[i].y;
      const Eigen::Vector2d z = D * x.head<3>();
      const double nz = z.norm();
      const Eigen::Vector2d w = z / nz;
      Eigen::Matrix<double, 5, 1> J;
      J.head<3>() = D.transpose() * w;
      J[3] = a[i].x;
      J[4] = a[i].y;
      H += mu * J * J.transpose() / (s * s);
      H.topLeftCorner<3, 3>() += mu / s * D.transpose() * (Eigen::Matrix2d::Identity() - w * w.transpose()) * D / nz;
    }
    return H;
  }
};

}  // namespace detail

inline Ellipse john_ellipse(const ConvexPolygon& P_in) {
  // Normalized copy: centroid at the origin, unit scale.
  const Point c0 = P_in.centroid();
  const double sc = P_in.scale();
  const ConvexPolygon P = P_in.translated(c0 * -1).scaled(1 / sc);
  detail::JohnProblem prob;
  const auto& v = P.vertices();
  double r0 = 1e300;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point e = v[(i + 1) % v.size()] - v[i];
    const Point nrm = perp(e) * (-1 / norm(e));  // outward for counterclockwise order
    prob.a.push_back(nrm);
    prob.b.push_back(dot(nrm, v[i]));
    r0 = std::min(r0, prob.b.back());
  }
  using Vec = Eigen::Matrix<double, 5, 1>;
  Vec x;
  x << 0.5 * r0, 0, 0.5 * r0, 0, 0;
  const double m = static_cast<double>(prob.a.size());
  double mu = 1;
  double residual = 1e300;
  for (int outer = 0; outer < 60; ++outer) {
    for (int it = 0; it < 200; ++it) {
      const Vec g = prob.gradient(x, mu);
      Eigen::Matrix<double, 5, 5> H = prob.hessian(x, mu);
      Eigen::LDLT<Eigen::Matrix<double, 5, 5>> ldlt(H);
      Vec dx = -ldlt.solve(g);
      double dec = -g.dot(dx);
      if (!(dec > 0) || !std::isfinite(dec)) {
        dx = -g;  // fall back to steepest descent
        dec = g.dot(g);
      }
      if (dec / 2 < 1e-16) break;
      double step = 1;
      const double f0 = prob.value(x, mu);
      while (step > 1e-14) {
        const Vec xn = x + step * dx;
        if (prob.feasible(xn) && prob.value(xn, mu) <= f0 - 0.25 * step * dec + 1e-15 * std::abs(f0)) break;
        step *= 0.5;
      }
      if (step <= 1e-14) break;
      x += step * dx;
    }
    residual = m * mu;
    if (residual < 1e-12) break;
    mu /= 8;
  }
  if (!(residual < 1e-8) || !prob.feasible(x))
    throw JohnSolveFailed("barrier method stopped with gap " + std::to_string(residual));
  Eigen::Matrix2d B;
  B << x[0], x[1], x[1], x[2];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(B);
  Ellipse E;
  E.center = Point{x[3], x[4]} * sc + c0;
  E.a1 = es.eigenvalues()[1] * sc;
  E.a2 = es.eigenvalues()[0] * sc;
  const Eigen::Vector2d u = es.eigenvectors().col(1);
  double ang = std::atan2(u[1], u[0]);
  if (ang < 0) ang += kPi;
  if (ang >= kPi) ang -= kPi;
  E.orientation = ang;
  return E;
}

// ---------------------------------------------------------------------------

// Clips P to {p : <n, p> <= offset} (keep_below) or >= offset.
inline std::vector<Point> clip_halfplane(const std::vector<Point>& poly, const Point& n, double offset, bool keep_below) {
  std::vector<Point> out;
  const std::size_t m = poly.size();
  auto side = [&](const Point& p) { return keep_below ? offset - dot(n, p) : dot(n, p) - offset; };
  for (std::size_t i = 0; i < m; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % m];
    const double sa = side(a), sb = side(b);
    if (sa >= 0) out.push_back(a);
    if ((sa > 0 && sb < 0) || (sa < 0 && sb > 0)) {
      const double t = sa / (sa - sb);
      out.push_back(a + (b - a) * t);
    }
  }
  return out;
}

// Splits P along the line <(cos angle, sin angle), p> = offset; first part is below the line.
inline std::pair<ConvexPolygon, ConvexPolygon> halfplane_cut(const ConvexPolygon& P, double angle, double offset) {
  const Point n = unit(angle);
  const auto lo = clip_halfplane(P.vertices(), n, offset, true);
  const auto hi = clip_halfplane(P.vertices(), n, offset, false);
  const double area = P.area();
  if (lo.size() < 3 || hi.size() < 3 || signed_area(lo) < kEpsGeom * area || signed_area(hi) < kEpsGeom * area)
    throw EmptyCut("cut line does not split the polygon");
  return {ConvexPolygon::make(lo), ConvexPolygon::make(hi)};
}

// ---------------------------------------------------------------------------
// Generators.

inline ConvexPolygon make_square() { return ConvexPolygon::make({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

inline ConvexPolygon make_rectangle(double d, double eps) {
  if (!(d > 0 && eps > 0)) throw InvalidInput("rectangle sides must be positive");
  return ConvexPolygon::make({{0, 0}, {d, 0}, {d, eps}, {0, eps}});
}

// Regular k-gon with circumradius r centred at the origin, first vertex on the x axis.
inline ConvexPolygon make_ngon(int k, double r = 1) {
  if (k < 3) throw InvalidInput("ngon needs k >= 3");
  std::vector<Point> v;
  for (int i = 0; i < k; ++i) v.push_back(unit(2 * kPi * i / k) * r);
  return ConvexPolygon::make(v);
}

inline ConvexPolygon make_disk(int k = 256) { return make_ngon(k, 1); }

// Circular sector of radius 1 and opening angle in (0, pi], apex at the origin.
inline ConvexPolygon make_sector(double angle, int arc_segments = 256) {
  if (!(angle > 0 && angle <= kPi + 1e-12)) throw InvalidInput("sector angle must lie in (0, pi]");
  std::vector<Point> v{{0, 0}};
  for (int i = 0; i <= arc_segments; ++i) v.push_back(unit(angle * i / arc_segments));
  return ConvexPolygon::make(v);
}

inline ConvexPolygon make_diamond() { return ConvexPolygon::make({{1, 0}, {0, 1}, {-1, 0}, {0, -1}}); }

// Convex hull (Andrew's monotone chain), counterclockwise.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

// Random convex polygon: k points on a randomly perturbed ellipse, convex hull taken.
inline ConvexPolygon make_random_polygon(int k, std::uint64_t seed) {
  if (k < 3) throw InvalidInput("random polygon needs k >= 3");
  Rng rng(seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double ax = 1.0, ay = rng.uniform(0.3, 1.0), rot = rng.uniform(0, kPi);
    std::vector<double> ang;
    for (int i = 0; i < k; ++i) ang.push_back(2 * kPi * (i + rng.uniform(-0.35, 0.35)) / k);
    std::vector<Point> pts;
    for (double t : ang) {
      const double r = 1 + rng.uniform(-0.1, 0.1);
      const Point p{ax * r * std::cos(t), ay * r * std::sin(t)};
      pts.push_back({p.x * std::cos(rot) - p.y * std::sin(rot), p.x * std::sin(rot) + p.y * std::cos(rot)});
    }
    auto hull = convex_hull(pts);
    if (hull.size() < 3) continue;
    try {
      return ConvexPolygon::make(hull);
    } catch (const Error&) {
    }
  }
  throw DegenerateDomain("could not generate a random polygon");
}

inline std::vector<std::string> split_spec(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(':', start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

// Built-in domains: square, disk, diamond, rect:d:eps, ngon:k, sector:angle, random:k:seed.
inline ConvexPolygon make_domain(const std::string& spec) {
  const auto p = split_spec(spec);
  auto num = [&](std::size_t i) {
    if (i >= p.size()) throw InvalidInput("missing parameter in domain spec '" + spec + "'");
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(p[i], &used);
    } catch (const std::exception&) {
      throw InvalidInput("bad number in domain spec '" + spec + "'");
    }
    if (used != p[i].size()) throw InvalidInput("bad number in domain spec '" + spec + "'");
    return v;
  };
  auto expect = [&](std::size_t n) {
    if (p.size() != n) throw InvalidInput("wrong number of parameters in domain spec '" + spec + "'");
  };
  if (p[0] == "square") return expect(1), make_square();
  if (p[0] == "disk") return expect(1), make_disk();
  if (p[0] == "diamond") return expect(1), make_diamond();
  if (p[0] == "rect") return expect(3), make_rectangle(num(1), num(2));
  if (p[0] == "ngon") return expect(2), make_ngon(static_cast<int>(num(1)));
  if (p[0] == "sector") return expect(2), make_sector(num(1));
  if (p[0] == "random") return expect(3), make_random_polygon(static_cast<int>(num(1)), static_cast<std::uint64_t>(num(2)));
  throw InvalidInput("unknown domain '" + spec + "'");
}

}  // namespace gaplab
