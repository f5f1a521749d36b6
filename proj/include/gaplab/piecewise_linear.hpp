#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gaplab/common.hpp"
#include "gaplab/error.hpp"

namespace gaplab {

// Continuous piecewise-linear function through (x[k], y[k]), x strictly increasing.
// Constant extension outside [x.front(), x.back()].
struct PiecewiseLinear {
  std::vector<double> x;
  std::vector<double> y;

  std::size_t size() const { return x.size(); }
  double a() const { return x.front(); }
  double b() const { return x.back(); }

  double operator()(double t) const {
    if (t <= x.front()) return y.front();
    if (t >= x.back()) return y.back();
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - x.begin());
    const double s = (t - x[k - 1]) / (x[k] - x[k - 1]);
    return (1 - s) * y[k - 1] + s * y[k];
  }

  static PiecewiseLinear from_grid(const GridFunction1D& f) {
    PiecewiseLinear p;
    for (int i = 0; i <= f.grid.n; ++i) {
      p.x.push_back(f.grid.x(i));
      p.y.push_back(f.values[i]);
    }
    return p;
  }

  double max_value() const { return *std::max_element(y.begin(), y.end()); }
  double min_value() const { return *std::min_element(y.begin(), y.end()); }
  double sup_norm() const {
    double m = 0;
    for (double v : y) m = std::max(m, std::abs(v));
    return m;
  }

  // Exact integral of the square.
  double integral_sq() const {
    double s = 0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k)
      s += (x[k + 1] - x[k]) * (y[k] * y[k] + y[k] * y[k + 1] + y[k + 1] * y[k + 1]) / 3;
    return s;
  }

  // Exact integral of the squared derivative.
  double dirichlet_energy() const {
    double s = 0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
      const double d = y[k + 1] - y[k];
      s += d * d / (x[k + 1] - x[k]);
    }
    return s;
  }

  // |{f > t}| (strict) or |{f >= t}| (closed).
  double level_measure(double t, bool closed = false) const {
    double m = 0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
      const double y0 = y[k], y1 = y[k + 1], len = x[k + 1] - x[k];
      const bool in0 = closed ? y0 >= t : y0 > t;
      const bool in1 = closed ? y1 >= t : y1 > t;
      if (in0 && in1) {
        m += len;
      } else if (in0 != in1) {
        const double s = (t - y0) / (y1 - y0);  // crossing parameter
        m += in0 ? s * len : (1 - s) * len;
      }
    }
    return m;
  }

  // Restriction to [lo, hi] (inside the support), inserting the cut points.
  PiecewiseLinear restrict(double lo, double hi) const {
    PiecewiseLinear p;
    p.x.push_back(lo);
    p.y.push_back((*this)(lo));
    for (std::size_t k = 0; k < x.size(); ++k)
      if (x[k] > lo && x[k] < hi) {
        p.x.push_back(x[k]);
        p.y.push_back(y[k]);
      }
    p.x.push_back(hi);
    p.y.push_back((*this)(hi));
    p.dedupe();
    return p;
  }

  PiecewiseLinear shifted(double dx) const {
    PiecewiseLinear p = *this;
    for (double& v : p.x) v += dx;
    return p;
  }

  // Drops nodes closer than tol to their predecessor.
  void dedupe(double tol = 1e-14) {
    std::vector<double> nx, ny;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (!nx.empty() && x[k] - nx.back() <= tol * std::max(1.0, std::abs(x[k]))) {
        ny.back() = y[k];
        nx.back() = x[k];
        continue;
      }
      nx.push_back(x[k]);
      ny.push_back(y[k]);
    }
    x = std::move(nx);
    y = std::move(ny);
  }

  // Joins pieces sorted by position; adjacent pieces share an endpoint.
  static PiecewiseLinear concat(const std::vector<PiecewiseLinear>& pieces) {
    PiecewiseLinear p;
    for (const auto& q : pieces)
      for (std::size_t k = 0; k < q.size(); ++k) {
        p.x.push_back(q.x[k]);
        p.y.push_back(q.y[k]);
      }
    p.dedupe();
    return p;
  }
};

}  // namespace gaplab
