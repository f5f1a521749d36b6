#pragma once

#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <queue>
#include <string>
#include <vector>

#include "gaplab/common.hpp"
#include "gaplab/error.hpp"
#include "gaplab/geometry.hpp"
#include "gaplab/oned_spectral.hpp"
#include "gaplab/sparse_eigen.hpp"

namespace gaplab {

inline constexpr double kCellsAcrossWidth = 60;    // default resolution
inline constexpr double kMinCellsAcrossWidth = 8;  // below this a grid is rejected
inline constexpr double kWeightFloor = 1e-14;
inline constexpr double kQuotientCutoff = 1e-6;

// Cell-centred grid over the bounding box of a polygon. Unknowns live on the
// cells whose centre is strictly inside ("mask"). Besides the mask the grid
// stores what the two boundary treatments need:
//  - theta: distance from a mask cell centre to the boundary along each axis
//    direction, in units of the spacing, where the neighbour is off-mask;
//  - volume and face apertures of the cut cells; area of cut cells outside the
//    mask is merged into an adjacent mask cell.
struct Grid2D {
  double x0 = 0, y0 = 0, hx = 0, hy = 0;
  int nx = 0, ny = 0;
  std::vector<int> index;   // cell id -> unknown, -1 off mask
  std::vector<int> cells;   // unknown -> cell id
  std::vector<std::array<double, 4>> theta;  // +x, -x, +y, -y; 0 when the neighbour is on the mask
  std::vector<double> volume;                // cut-cell area including merged fragments
  std::vector<double> aperture_x;            // face to the +x neighbour, fraction of hy
  std::vector<double> aperture_y;            // face to the +y neighbour, fraction of hx
  double lost_area = 0;                      // cut fragments without a mask neighbour
  double polygon_area = 0;

  int size() const { return static_cast<int>(cells.size()); }
  double cell_area() const { return hx * hy; }
  int cell_id(int i, int j) const { return j * nx + i; }
  int unknown(int i, int j) const {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return -1;
    return index[cell_id(i, j)];
  }
  int col(int u) const { return cells[u] % nx; }
  int row(int u) const { return cells[u] / nx; }
  Point center(int i, int j) const { return {x0 + (i + 0.5) * hx, y0 + (j + 0.5) * hy}; }
  Point center(int u) const { return center(col(u), row(u)); }

  static Grid2D make(const ConvexPolygon& P, double delta);
};

namespace detail {

// Parameter range [t0, t1] of the segment a + t (b - a), t in [0, 1], inside P.
inline std::pair<double, double> segment_inside(const ConvexPolygon& P, const Point& a, const Point& b) {
  double t0 = 0, t1 = 1;
  const auto& v = P.vertices();
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Point e = v[(k + 1) % v.size()] - v[k];
    const Point n = perp(e);  // inward for counterclockwise order
    const double fa = dot(n, a - v[k]), fb = dot(n, b - v[k]);
    if (fa < 0 && fb < 0) return {1, 0};
    if (fa < 0) t0 = std::max(t0, fa / (fa - fb));
    if (fb < 0) t1 = std::min(t1, fa / (fa - fb));
  }
  return {t0, t1};
}

// Distance from an interior point to the boundary along a unit direction.
inline double ray_exit(const ConvexPolygon& P, const Point& c, const Point& d) {
  double t = 1e300;
  const auto& v = P.vertices();
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Point e = v[(k + 1) % v.size()] - v[k];
    const Point n = perp(e) * (-1 / norm(e));  // outward
    const double nd = dot(n, d);
    if (nd > 0) t = std::min(t, (dot(n, v[k]) - dot(n, c)) / nd);
  }
  return t;
}

inline double cell_overlap(const ConvexPolygon& P, double xa, double ya, double xb, double yb) {
  std::vector<Point> cell{{xa, ya}, {xb, ya}, {xb, yb}, {xa, yb}};
  const auto& v = P.vertices();
  for (std::size_t k = 0; k < v.size() && cell.size() >= 3; ++k) {
    const Point e = v[(k + 1) % v.size()] - v[k];
    const Point n = perp(e) * (-1 / norm(e));
    cell = clip_halfplane(cell, n, dot(n, v[k]), true);
  }
  return cell.size() >= 3 ? signed_area(cell) : 0.0;
}

}  // namespace detail

inline Grid2D Grid2D::make(const ConvexPolygon& P, double delta) {
  if (!(delta > 0)) throw InvalidInput("grid spacing must be positive");
  const double w = width(P);
  double xmin, xmax, ymin, ymax;
  P.bbox(xmin, xmax, ymin, ymax);
  Grid2D g;
  g.nx = std::max(1, static_cast<int>(std::ceil((xmax - xmin) / delta - 1e-9)));
  g.ny = std::max(1, static_cast<int>(std::ceil((ymax - ymin) / delta - 1e-9)));
  g.hx = (xmax - xmin) / g.nx;
  g.hy = (ymax - ymin) / g.ny;
  g.x0 = xmin;
  g.y0 = ymin;
  if (w / std::max(g.hx, g.hy) < kMinCellsAcrossWidth)
    throw ResolutionError("grid spacing " + std::to_string(delta) + " leaves fewer than " +
                          std::to_string(static_cast<int>(kMinCellsAcrossWidth)) + " cells across the width " +
                          std::to_string(w));
  if (static_cast<double>(g.nx) * g.ny > 2.5e7) throw ResolutionError("grid too large");
  g.polygon_area = P.area();
  const double eps = 1e-12 * P.scale();
  g.index.assign(static_cast<std::size_t>(g.nx) * g.ny, -1);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (P.inside_distance(g.center(i, j)) > eps) {
        g.index[g.cell_id(i, j)] = g.size();
        g.cells.push_back(g.cell_id(i, j));
      }
  if (g.cells.empty()) throw ResolutionError("no grid cell centre inside the polygon");

  // Connectivity of the mask under 4-neighbour adjacency.
  {
    std::vector<char> seen(g.cells.size(), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      const int i = g.col(u), j = g.row(u);
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const int v = g.unknown(i + di, j + dj);
        if (v >= 0 && !seen[v]) {
          seen[v] = 1;
          ++count;
          q.push(v);
        }
      }
    }
    if (count != g.size()) throw ResolutionError("grid mask is not connected; refine the grid");
  }

  const int n = g.size();
  g.theta.assign(n, {0, 0, 0, 0});
  g.volume.assign(n, 0);
  g.aperture_x.assign(n, 0);
  g.aperture_y.assign(n, 0);
  const Point dirs[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
  for (int u = 0; u < n; ++u) {
    const int i = g.col(u), j = g.row(u);
    const Point c = g.center(i, j);
    for (int d = 0; d < 4; ++d) {
      if (g.unknown(i + di[d], j + dj[d]) >= 0) continue;
      const double h = d < 2 ? g.hx : g.hy;
      g.theta[u][d] = std::clamp(detail::ray_exit(P, c, dirs[d]) / h, 1e-3, 1.0);
    }
    if (g.unknown(i + 1, j) >= 0) {
      const double xf = g.x0 + (i + 1) * g.hx, ya = g.y0 + j * g.hy;
      const auto [t0, t1] = detail::segment_inside(P, {xf, ya}, {xf, ya + g.hy});
      g.aperture_x[u] = std::max(0.0, t1 - t0);
    }
    if (g.unknown(i, j + 1) >= 0) {
      const double yf = g.y0 + (j + 1) * g.hy, xa = g.x0 + i * g.hx;
      const auto [t0, t1] = detail::segment_inside(P, {xa, yf}, {xa + g.hx, yf});
      g.aperture_y[u] = std::max(0.0, t1 - t0);
    }
  }

  // Cut-cell volumes; fragments off the mask go to the neighbour sharing the
  // longest face, else to the nearest diagonal neighbour.
  const double reach = g.hx + g.hy;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Point c = g.center(i, j);
      const double dist_in = P.inside_distance(c);
      if (dist_in < -reach) continue;
      const double xa = g.x0 + i * g.hx, ya = g.y0 + j * g.hy;
      double area;
      if (dist_in >= 0.5 * reach)
        area = g.hx * g.hy;
      else
        area = detail::cell_overlap(P, xa, ya, xa + g.hx, ya + g.hy);
      if (!(area > 0)) continue;
      const int u = g.unknown(i, j);
      if (u >= 0) {
        g.volume[u] += area;
        continue;
      }
      int target = -1;
      double best = 0;
      for (int d = 0; d < 4; ++d) {
        const int v = g.unknown(i + di[d], j + dj[d]);
        if (v < 0) continue;
        Point a, b;
        if (d == 0) a = {xa + g.hx, ya}, b = {xa + g.hx, ya + g.hy};
        if (d == 1) a = {xa, ya}, b = {xa, ya + g.hy};
        if (d == 2) a = {xa, ya + g.hy}, b = {xa + g.hx, ya + g.hy};
        if (d == 3) a = {xa, ya}, b = {xa + g.hx, ya};
        const auto [t0, t1] = detail::segment_inside(P, a, b);
        const double len = std::max(0.0, t1 - t0) + 1e-300;
        if (len > best) best = len, target = v;
      }
      if (target < 0)
        for (auto [a, b] : {std::pair{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}) {
          const int v = g.unknown(i + a, j + b);
          if (v >= 0) {
            target = v;
            break;
          }
        }
      if (target >= 0)
        g.volume[target] += area;
      else
        g.lost_area += area;
    }
  for (double& v : g.volume) v = std::max(v, 1e-6 * g.hx * g.hy);
  return g;
}

// Values on the mask of a grid; zero extension off the mask.
struct GridFunction2D {
  std::shared_ptr<const Grid2D> grid;
  Eigen::VectorXd values;

  double at(int i, int j) const {
    const int u = grid->unknown(i, j);
    return u >= 0 ? values[u] : 0.0;
  }

  // Bilinear interpolation between cell centres.
  double operator()(const Point& p) const {
    const double fx = (p.x - grid->x0) / grid->hx - 0.5, fy = (p.y - grid->y0) / grid->hy - 0.5;
    const int i = static_cast<int>(std::floor(fx)), j = static_cast<int>(std::floor(fy));
    const double tx = fx - i, ty = fy - j;
    return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) + (1 - tx) * ty * at(i, j + 1) +
           tx * ty * at(i + 1, j + 1);
  }

  double max_abs() const { return values.cwiseAbs().maxCoeff(); }
  double integral() const { return values.sum() * grid->cell_area(); }
  double integral_sq() const { return values.squaredNorm() * grid->cell_area(); }
};

enum class EigenKind { Dirichlet, Neumann, WeightedNeumann };

inline const char* to_string(EigenKind k) {
  switch (k) {
    case EigenKind::Dirichlet: return "dirichlet";
    case EigenKind::Neumann: return "neumann";
    case EigenKind::WeightedNeumann: return "weighted_neumann";
  }
  return "?";
}

struct EigenPair2D {
  double value = 0;
  GridFunction2D function;  // midpoint-normalized: sum u^2 * cell area = 1
  EigenKind kind = EigenKind::Dirichlet;
  double coarse_value = 0;      // same problem at spacing 2 delta
  double error_estimate = 0;    // |value - coarse_value|
  bool has_estimate = false;

  double extrapolated() const { return has_estimate ? (4 * value - coarse_value) / 3 : value; }
  double tol() const { return 3 * error_estimate; }
};

using Potential2D = std::function<double(const Point&)>;
// Produces per-unknown weight samples for a given grid, so two-grid estimates
// can rebuild the weight consistently on the coarse grid.
using WeightField = std::function<Eigen::VectorXd(const ConvexPolygon&, const Grid2D&)>;

struct Solve2DOptions {
  double delta = 0;  // 0: width / 60
  bool two_grid = true;
  Potential2D potential;  // Dirichlet only; added to the diagonal
  std::uint64_t seed = 12345;
};

inline double default_delta(const ConvexPolygon& P) { return width(P) / kCellsAcrossWidth; }

namespace detail {

inline void midpoint_normalize(GridFunction2D& f) {
  const double nrm = std::sqrt(f.integral_sq());
  if (nrm > 0) f.values /= nrm;
}

struct GridEigen {
  std::vector<double> values;
  std::vector<Eigen::VectorXd> vectors;
};

inline GridEigen dirichlet_on_grid(const Grid2D& g, int k, const Potential2D& V, std::uint64_t seed) {
  const int n = g.size();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(5 * static_cast<std::size_t>(n));
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  const double cx = g.hy / g.hx, cy = g.hx / g.hy;
  for (int u = 0; u < n; ++u) {
    const int i = g.col(u), j = g.row(u);
    const int nb[4] = {g.unknown(i + 1, j), g.unknown(i - 1, j), g.unknown(i, j + 1), g.unknown(i, j - 1)};
    for (int d = 0; d < 4; ++d) {
      const double c = d < 2 ? cx : cy;
      if (nb[d] >= 0) {
        diag[u] += c;
        t.emplace_back(u, nb[d], -c);
      } else {
        diag[u] += c / g.theta[u][d];
      }
    }
    if (V) diag[u] += V(g.center(u)) * g.cell_area();
  }
  for (int u = 0; u < n; ++u) t.emplace_back(u, u, diag[u]);
  SparseMatrix A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(n, g.cell_area());
  SparseEigenOptions opt;
  opt.count = k;
  opt.seed = seed;
  double vmin = 0;
  if (V)
    for (int u = 0; u < n; ++u) vmin = std::min(vmin, V(g.center(u)));
  opt.shift = vmin < 0 ? 2 * vmin - 1 : 0.0;
  const auto r = smallest_eigenpairs(A, b, opt);
  GridEigen out;
  out.values = r.values;
  for (int j = 0; j < k; ++j) out.vectors.push_back(r.vectors.col(j));
  return out;
}

// Second eigenpair of the (weighted) cut-cell Neumann problem; phi empty means phi = 1.
inline std::pair<double, Eigen::VectorXd> neumann_on_grid(const Grid2D& g, const Eigen::VectorXd& phi_in,
                                                          double scale, std::uint64_t seed) {
  const int n = g.size();
  if (n < 2) throw ResolutionError("Neumann problem needs at least two cells");
  Eigen::VectorXd phi = phi_in.size() == n ? phi_in : Eigen::VectorXd::Ones(n);
  const double pmax = phi.maxCoeff();
  if (!(pmax > 0) || !phi.allFinite()) throw DegenerateWeight("weight must be positive somewhere and finite");
  for (int u = 0; u < n; ++u) {
    if (phi[u] < 0) throw DegenerateWeight("weight must be nonnegative");
    phi[u] = std::max(phi[u], kWeightFloor * pmax);
  }
  std::vector<Eigen::Triplet<double>> t;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  auto face = [&](int u, int v, double c) {
    const double w = c * 2 * phi[u] * phi[v] / (phi[u] + phi[v]);
    if (!(w > 0)) return;
    diag[u] += w;
    diag[v] += w;
    t.emplace_back(u, v, -w);
    t.emplace_back(v, u, -w);
  };
  for (int u = 0; u < n; ++u) {
    const int i = g.col(u), j = g.row(u);
    if (const int v = g.unknown(i + 1, j); v >= 0) face(u, v, g.aperture_x[u] * g.hy / g.hx);
    if (const int v = g.unknown(i, j + 1); v >= 0) face(u, v, g.aperture_y[u] * g.hx / g.hy);
  }
  for (int u = 0; u < n; ++u) t.emplace_back(u, u, diag[u]);
  SparseMatrix A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(g.volume.data(), n).cwiseProduct(phi);
  SparseEigenOptions opt;
  opt.count = 2;
  opt.seed = seed;
  opt.shift = -1.0 / (scale * scale);
  const auto r = smallest_eigenpairs(A, b, opt);
  if (!(std::abs(r.values[0]) <= 1e-6 * std::abs(r.values[1])))
    throw SolverFailed("constant mode not found: lowest Neumann value " + std::to_string(r.values[0]));
  return {r.values[1], r.vectors.col(1)};
}

inline void fix_sign(Eigen::VectorXd& v, bool positive_sum) {
  if (positive_sum) {
    if (v.sum() < 0) v = -v;
    return;
  }
  Eigen::Index k;
  v.cwiseAbs().maxCoeff(&k);
  if (v[k] < 0) v = -v;
}

}  // namespace detail

// k smallest Dirichlet eigenpairs of the 5-point Laplacian (plus optional potential).
inline std::vector<EigenPair2D> dirichlet_eigs(const ConvexPolygon& P, int k, const Solve2DOptions& opt = {}) {
  if (k < 1 || k > 3) throw InvalidInput("k must be 1, 2 or 3");
  const double delta = opt.delta > 0 ? opt.delta : default_delta(P);
  auto g = std::make_shared<const Grid2D>(Grid2D::make(P, delta));
  const auto fine = detail::dirichlet_on_grid(*g, k, opt.potential, opt.seed);
  std::vector<double> coarse;
  if (opt.two_grid) coarse = detail::dirichlet_on_grid(Grid2D::make(P, 2 * delta), k, opt.potential, opt.seed).values;
  std::vector<EigenPair2D> out;
  for (int j = 0; j < k; ++j) {
    EigenPair2D e;
    e.kind = EigenKind::Dirichlet;
    e.value = fine.values[j];
    e.function = {g, fine.vectors[j]};
    detail::fix_sign(e.function.values, j == 0);
    detail::midpoint_normalize(e.function);
    if (opt.two_grid) {
      e.coarse_value = coarse[j];
      e.error_estimate = std::abs(e.value - e.coarse_value);
      e.has_estimate = true;
    }
    out.push_back(std::move(e));
  }
  return out;
}

// Smallest nonzero eigenpair of -div(phi grad u) = mu phi u with natural boundary
// conditions (cut-cell finite volumes, harmonic-mean face weights).
inline EigenPair2D weighted_neumann_eig1(const ConvexPolygon& P, const WeightField& phi, const Solve2DOptions& opt = {}) {
  const double delta = opt.delta > 0 ? opt.delta : default_delta(P);
  const double D = diameter(P).length;
  auto solve = [&](const Grid2D& g) {
    const Eigen::VectorXd w = phi ? phi(P, g) : Eigen::VectorXd();
    return detail::neumann_on_grid(g, w, D, opt.seed);
  };
  auto g = std::make_shared<const Grid2D>(Grid2D::make(P, delta));
  auto [mu, vec] = solve(*g);
  EigenPair2D e;
  e.kind = phi ? EigenKind::WeightedNeumann : EigenKind::Neumann;
  e.value = mu;
  e.function = {g, vec};
  detail::fix_sign(e.function.values, false);
  detail::midpoint_normalize(e.function);
  if (opt.two_grid) {
    e.coarse_value = solve(Grid2D::make(P, 2 * delta)).first;
    e.error_estimate = std::abs(e.value - e.coarse_value);
    e.has_estimate = true;
  }
  return e;
}

inline EigenPair2D neumann_eig1(const ConvexPolygon& P, const Solve2DOptions& opt = {}) {
  return weighted_neumann_eig1(P, WeightField{}, opt);
}

// Weight given by a function of position, sampled at cell centres.
inline WeightField weight_from_function(std::function<double(const Point&)> f) {
  return [f = std::move(f)](const ConvexPolygon&, const Grid2D& g) {
    Eigen::VectorXd w(g.size());
    for (int u = 0; u < g.size(); ++u) w[u] = f(g.center(u));
    return w;
  };
}

// phi = u_1^2, the squared first Dirichlet eigenfunction on the same grid.
inline WeightField ground_state_weight(std::uint64_t seed = 12345) {
  return [seed](const ConvexPolygon&, const Grid2D& g) {
    Eigen::VectorXd u = detail::dirichlet_on_grid(g, 1, {}, seed).vectors[0];
    return Eigen::VectorXd(u.cwiseProduct(u));
  };
}

// ---------------------------------------------------------------------------

struct GapIdentityReport {
  double lambda1 = 0, lambda2 = 0;
  double gap = 0, gap_error = 0;
  double mu_weighted = 0, mu_error = 0;
  double rayleigh = 0;  // Rayleigh quotient of u2/u1 with weight u1^2
  int excluded_cells = 0;
  int cells = 0;
  double spread = 0;  // (max - min) / gap over the three values
  double tolerance = 0.03;
  bool pass = false;
};

// Weighted Rayleigh quotient int phi |grad v|^2 / int phi (v - mean)^2 with
// plain finite differences over the given cells.
inline double weighted_rayleigh(const Grid2D& g, const Eigen::VectorXd& phi, const Eigen::VectorXd& v,
                                const std::vector<char>& use) {
  double wsum = 0, mean = 0;
  for (int u = 0; u < g.size(); ++u)
    if (use[u]) {
      wsum += phi[u];
      mean += phi[u] * v[u];
    }
  mean /= wsum;
  double num = 0, den = 0;
  for (int u = 0; u < g.size(); ++u) {
    if (!use[u]) continue;
    den += phi[u] * (v[u] - mean) * (v[u] - mean) * g.cell_area();
    const int i = g.col(u), j = g.row(u);
    const int nb[2] = {g.unknown(i + 1, j), g.unknown(i, j + 1)};
    const double c[2] = {g.hy / g.hx, g.hx / g.hy};
    for (int d = 0; d < 2; ++d) {
      const int w = nb[d];
      if (w < 0 || !use[w]) continue;
      const double pf = 2 * phi[u] * phi[w] / (phi[u] + phi[w]);
      num += c[d] * pf * (v[u] - v[w]) * (v[u] - v[w]);
    }
  }
  return num / den;
}

inline GapIdentityReport gap_identity_check(const ConvexPolygon& P, const Solve2DOptions& opt = {}) {
  GapIdentityReport r;
  const auto d = dirichlet_eigs(P, 2, opt);
  r.lambda1 = d[0].value;
  r.lambda2 = d[1].value;
  r.gap = r.lambda2 - r.lambda1;
  r.gap_error = d[0].error_estimate + d[1].error_estimate;
  const auto mu = weighted_neumann_eig1(P, ground_state_weight(opt.seed), opt);
  r.mu_weighted = mu.value;
  r.mu_error = mu.error_estimate;

  const Grid2D& g = *d[0].function.grid;
  const Eigen::VectorXd& u1 = d[0].function.values;
  const Eigen::VectorXd& u2 = d[1].function.values;
  const double cut = kQuotientCutoff * u1.maxCoeff();
  std::vector<char> use(g.size(), 0);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(g.size());
  for (int u = 0; u < g.size(); ++u) {
    if (u1[u] > cut) {
      use[u] = 1;
      q[u] = u2[u] / u1[u];
    } else {
      ++r.excluded_cells;
    }
  }
  r.cells = g.size();
  r.rayleigh = weighted_rayleigh(g, u1.cwiseProduct(u1), q, use);
  const double hi = std::max({r.gap, r.mu_weighted, r.rayleigh});
  const double lo = std::min({r.gap, r.mu_weighted, r.rayleigh});
  r.spread = (hi - lo) / r.gap;
  r.pass = r.spread < r.tolerance;
  return r;
}

// ---------------------------------------------------------------------------

struct LinfBoundReport {
  double mu = 0, mu_error = 0;
  double diameter = 0;
  double weight_mass = 0;     // int phi
  double sup = 0, l2 = 0;     // sup |u| and weighted L2 norm
  double ratio = 0;           // sup / l2
  double scale_factor = 0;    // mu^((N+m)/2) D^(N+m) / sqrt(int phi)
  double implied_constant = 0;
  double m = 1;
  bool finite = false;
};

// phi must be positive and (1/m)-concave; phi empty means phi = 1.
inline LinfBoundReport linf_bound_check(const ConvexPolygon& P, const WeightField& phi, double m = 1,
                                        const Solve2DOptions& opt = {}) {
  LinfBoundReport r;
  r.m = m;
  const auto e = weighted_neumann_eig1(P, phi, opt);
  r.mu = e.value;
  r.mu_error = e.error_estimate;
  r.diameter = diameter(P).length;
  const Grid2D& g = *e.function.grid;
  const Eigen::VectorXd w = phi ? phi(P, g) : Eigen::VectorXd::Ones(g.size());
  const Eigen::VectorXd& u = e.function.values;
  r.weight_mass = w.sum() * g.cell_area();
  r.sup = u.cwiseAbs().maxCoeff();
  r.l2 = std::sqrt(w.cwiseProduct(u.cwiseProduct(u)).sum() * g.cell_area());
  r.ratio = r.sup / r.l2;
  const double ex = 2 + m;
  r.scale_factor = std::pow(r.mu, ex / 2) * std::pow(r.diameter, ex) / std::sqrt(r.weight_mass);
  r.implied_constant = r.ratio / r.scale_factor;
  r.finite = std::isfinite(r.implied_constant) && r.implied_constant > 0;
  return r;
}

// ---------------------------------------------------------------------------

// Polygonal hypograph {(x, y) : x in I, |y| < eps phi(x) / 2} with `samples` abscissae.
inline ConvexPolygon hypograph_polygon(const Interval& I, const std::function<double(double)>& phi, double eps,
                                       int samples = 64) {
  std::vector<Point> top, bottom;
  for (int k = 0; k <= samples; ++k) {
    const double x = I.a + I.length() * k / samples;
    const double h = 0.5 * eps * std::max(0.0, phi(x));
    bottom.push_back({x, -h});
    top.push_back({x, h});
  }
  std::vector<Point> v = bottom;
  v.insert(v.end(), top.rbegin(), top.rend());
  return ConvexPolygon::make(v);
}

struct CollapsingEntry {
  double eps = 0;
  double mu = 0, error = 0;
  double rel_diff = 0;  // |mu - mu_1d| / mu_1d
};

struct CollapsingReport {
  double mu_1d = 0, mu_1d_error = 0;
  std::vector<CollapsingEntry> entries;
  bool monotone = false;  // rel_diff nonincreasing as eps decreases
};

// phi must be concave and positive inside I; eps_seq in decreasing order.
inline CollapsingReport collapsing_check(const Interval& I, const std::function<double(double)>& phi,
                                         const std::vector<double>& eps_seq, double cells_across = kCellsAcrossWidth,
                                         int samples = 64) {
  CollapsingReport r;
  const auto one = neumann_weighted_eig1(I, Weight1D{I, phi}, 2048);
  r.mu_1d = one.extrapolated_value;
  r.mu_1d_error = one.tol();
  for (double eps : eps_seq) {
    const ConvexPolygon P = hypograph_polygon(I, phi, eps, samples);
    Solve2DOptions opt;
    opt.delta = width(P) / cells_across;
    const auto e = neumann_eig1(P, opt);
    r.entries.push_back({eps, e.value, e.error_estimate, std::abs(e.value - r.mu_1d) / r.mu_1d});
  }
  r.monotone = true;
  for (std::size_t k = 1; k < r.entries.size(); ++k)
    if (r.entries[k].rel_diff > r.entries[k - 1].rel_diff + r.entries[k].error / r.mu_1d) r.monotone = false;
  return r;
}

// ---------------------------------------------------------------------------
// Pairwise concavity of log u1: for interior points x, y,
//   (grad log u1(y) - grad log u1(x)) . e <= -2 (pi / D) tan(pi |y - x| / (2 D)),
// with e = (y - x) / |y - x|. Gradients are central differences at cell centres,
// interpolated bilinearly; the tolerance is three times the two-grid change.

struct LogConcavityReport {
  int pairs = 0;
  int violations = 0;
  double worst_margin = 0;  // min over pairs of rhs + tol - lhs
  double max_tol = 0;
  double diameter = 0;
};

namespace detail {

struct LogGradientField {
  std::shared_ptr<const Grid2D> grid;
  Eigen::VectorXd gx, gy;
  std::vector<char> valid;

  // Cells whose neighbours are on the mask and whose centre is at least
  // `margin` from the boundary.
  static LogGradientField make(const ConvexPolygon& P, const GridFunction2D& u1, double margin) {
    LogGradientField f;
    f.grid = u1.grid;
    const Grid2D& g = *f.grid;
    f.gx = Eigen::VectorXd::Zero(g.size());
    f.gy = Eigen::VectorXd::Zero(g.size());
    f.valid.assign(g.size(), 0);
    for (int u = 0; u < g.size(); ++u) {
      const int i = g.col(u), j = g.row(u);
      const int e = g.unknown(i + 1, j), w = g.unknown(i - 1, j), n = g.unknown(i, j + 1), s = g.unknown(i, j - 1);
      if (e < 0 || w < 0 || n < 0 || s < 0) continue;
      if (P.inside_distance(g.center(u)) < margin) continue;
      const auto& v = u1.values;
      if (!(v[e] > 0 && v[w] > 0 && v[n] > 0 && v[s] > 0)) continue;
      f.gx[u] = (std::log(v[e]) - std::log(v[w])) / (2 * g.hx);
      f.gy[u] = (std::log(v[n]) - std::log(v[s])) / (2 * g.hy);
      f.valid[u] = 1;
    }
    return f;
  }

  bool eval(const Point& p, Point& out) const {
    const Grid2D& g = *grid;
    const double fx = (p.x - g.x0) / g.hx - 0.5, fy = (p.y - g.y0) / g.hy - 0.5;
    const int i = static_cast<int>(std::floor(fx)), j = static_cast<int>(std::floor(fy));
    const double tx = fx - i, ty = fy - j;
    double sx = 0, sy = 0;
    const int ii[4] = {i, i + 1, i, i + 1}, jj[4] = {j, j, j + 1, j + 1};
    const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
    for (int k = 0; k < 4; ++k) {
      const int u = g.unknown(ii[k], jj[k]);
      if (u < 0 || !valid[u]) return false;
      sx += w[k] * gx[u];
      sy += w[k] * gy[u];
    }
    out = {sx, sy};
    return true;
  }
};

}  // namespace detail

inline LogConcavityReport log_concavity_check(const ConvexPolygon& P, int pairs, std::uint64_t seed,
                                              const Solve2DOptions& opt = {}) {
  const double delta = opt.delta > 0 ? opt.delta : default_delta(P);
  Solve2DOptions one = opt;
  one.two_grid = false;
  one.delta = delta;
  const auto fine = dirichlet_eigs(P, 1, one);
  one.delta = 2 * delta;
  const auto coarse = dirichlet_eigs(P, 1, one);
  // Exclusion band measured on the coarse grid so both fields are defined.
  const double margin = 4 * 2 * delta;
  const auto ff = detail::LogGradientField::make(P, fine[0].function, margin);
  const auto fc = detail::LogGradientField::make(P, coarse[0].function, margin);
  LogConcavityReport r;
  r.diameter = diameter(P).length;
  r.worst_margin = 1e300;
  Rng rng(seed);
  double xmin, xmax, ymin, ymax;
  P.bbox(xmin, xmax, ymin, ymax);
  auto draw = [&](Point& p) {
    for (int tries = 0; tries < 100000; ++tries) {
      p = {rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)};
      Point dummy;
      if (P.inside_distance(p) >= margin && ff.eval(p, dummy) && fc.eval(p, dummy)) return true;
    }
    return false;
  };
  while (r.pairs < pairs) {
    Point x, y;
    if (!draw(x) || !draw(y)) throw PreconditionFailed("no interior points away from the boundary");
    const double len = dist(x, y);
    if (len < 2 * delta) continue;
    const Point e = (y - x) * (1 / len);
    Point gxf, gyf, gxc, gyc;
    ff.eval(x, gxf);
    ff.eval(y, gyf);
    fc.eval(x, gxc);
    fc.eval(y, gyc);
    const double lhs = dot(gyf - gxf, e);
    const double lhs_c = dot(gyc - gxc, e);
    const double rhs = -2 * (kPi / r.diameter) * std::tan(kPi * len / (2 * r.diameter));
    const double tol = 3 * std::abs(lhs - lhs_c);
    r.max_tol = std::max(r.max_tol, tol);
    const double m = rhs + tol - lhs;
    r.worst_margin = std::min(r.worst_margin, m);
    if (m < 0) ++r.violations;
    ++r.pairs;
  }
  return r;
}

}  // namespace gaplab
