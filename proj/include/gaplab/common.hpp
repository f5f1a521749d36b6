#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "gaplab/error.hpp"

namespace gaplab {

inline constexpr double kPi = std::numbers::pi;

// Open interval (a, b), a < b.
struct Interval {
  double a = -kPi / 2;
  double b = kPi / 2;

  constexpr double length() const { return b - a; }
  constexpr double mid() const { return 0.5 * (a + b); }
  constexpr bool contains(double x) const { return x > a && x < b; }
  constexpr bool contains(const Interval& o) const { return o.a >= a && o.b <= b; }

  static constexpr Interval centered(double len) { return {-len / 2, len / 2}; }
};

// I_pi = (-pi/2, pi/2)
inline constexpr Interval kIpi{-kPi / 2, kPi / 2};

inline void require_interval(const Interval& I) {
  if (!(I.b > I.a) || !std::isfinite(I.a) || !std::isfinite(I.b))
    throw InvalidInput("interval must satisfy a < b");
}

// Uniform grid with n + 1 nodes a = x_0 < ... < x_n = b.
struct Grid1D {
  Interval I;
  int n = 0;

  double h() const { return I.length() / n; }
  double x(int i) const { return I.a + i * h(); }
  int nodes() const { return n + 1; }
};

struct GridFunction1D {
  Grid1D grid;
  std::vector<double> values;

  // Linear interpolation, constant extension outside the grid.
  double operator()(double x) const {
    const double t = (x - grid.I.a) / grid.h();
    if (t <= 0) return values.front();
    if (t >= grid.n) return values.back();
    const int i = static_cast<int>(t);
    const double s = t - i;
    return (1 - s) * values[i] + s * values[i + 1];
  }
};

// Deterministic generator: the bit stream of mt19937_64 is fully specified,
// and the double conversion below is done by hand so results do not depend
// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double normal() {
    const double u1 = std::max(uniform(), 1e-300);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * kPi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 8> kGaussNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGaussWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

template <class F>
double gauss_integrate(F&& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0;
  for (std::size_t k = 0; k < kGaussNodes.size(); ++k) s += kGaussWeights[k] * f(mid + half * kGaussNodes[k]);
  return s * half;
}

// Composite Gauss rule over sorted breakpoints.
template <class F>
double gauss_integrate(F&& f, std::span<const double> breaks, int sub = 1) {
  double s = 0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    if (!(b > a)) continue;
    for (int k = 0; k < sub; ++k) s += gauss_integrate(f, a + (b - a) * k / sub, a + (b - a) * (k + 1) / sub);
  }
  return s;
}

struct LineFit {
  double slope = 0;
  double intercept = 0;
};

// Ordinary least squares y = slope * x + intercept.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw FitUnderdetermined("need at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= n, my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0) throw FitUnderdetermined("degenerate abscissae");
  return {sxy / sxx, my - sxy / sxx * mx};
}

// Richardson extrapolation assuming an O(h^2) error, from grids n and 2n.
inline double richardson2(double coarse, double fine) { return (4 * fine - coarse) / 3; }

}  // namespace gaplab
