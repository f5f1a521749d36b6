#include <gtest/gtest.h>

#include <cmath>

#include "gaplab/planar_spectral.hpp"

using namespace gaplab;

namespace {

// Bessel J_n by its power series (adequate for |x| < 10).
double bessel_j(int n, double x) {
  double term = std::pow(x / 2, n) / std::tgamma(n + 1.0), sum = term;
  for (int k = 1; k < 60; ++k) {
    term *= -(x * x / 4) / (k * (k + n));
    sum += term;
  }
  return sum;
}

double bessel_j_prime(int n, double x) { return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x)); }

double bisect(const std::function<double(double)>& f, double a, double b) {
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    ((f(a) < 0) == (f(m) < 0) ? a : b) = m;
  }
  return 0.5 * (a + b);
}

const double j01 = bisect([](double x) { return bessel_j(0, x); }, 2, 3);
const double j11 = bisect([](double x) { return bessel_j(1, x); }, 3, 4.5);
const double jp11 = bisect([](double x) { return bessel_j_prime(1, x); }, 1.5, 2.2);

Solve2DOptions with_delta(double d) {
  Solve2DOptions o;
  o.delta = d;
  return o;
}

}  // namespace

TEST(BesselOracle, KnownZeros) {
  EXPECT_NEAR(j01 * j01, 5.7832, 1e-4);
  EXPECT_NEAR(j11 * j11, 14.6820, 1e-4);
  EXPECT_NEAR(jp11 * jp11, 3.3900, 1e-4);
}

TEST(Grid2D, MaskVolumesAndErrors) {
  const auto P = make_ngon(7);
  const Grid2D g = Grid2D::make(P, default_delta(P));
  double vol = g.lost_area;
  for (double v : g.volume) vol += v;
  EXPECT_NEAR(vol, P.area(), 1e-9);
  for (int u = 0; u < g.size(); ++u) EXPECT_TRUE(P.contains(g.center(u)));
  EXPECT_THROW(Grid2D::make(make_square(), 0.2), ResolutionError);
  EXPECT_THROW(Grid2D::make(make_square(), -1), InvalidInput);
}

TEST(Dirichlet2D, UnitSquareSpectrum) {
  const auto e = dirichlet_eigs(make_square(), 3, with_delta(1.0 / 120));
  EXPECT_NEAR(e[0].value / (2 * kPi * kPi), 1, 5e-3);
  EXPECT_NEAR(e[1].value / (5 * kPi * kPi), 1, 5e-3);
  EXPECT_NEAR(e[2].value / (5 * kPi * kPi), 1, 5e-3);
  EXPECT_LE(std::abs(e[0].extrapolated() - 2 * kPi * kPi), e[0].tol());
}

TEST(Dirichlet2D, RectangleGapIsThree) {
  const auto P = make_rectangle(kPi, 1);
  const auto e = dirichlet_eigs(P, 2);
  EXPECT_NEAR(e[0].value, 1 + kPi * kPi, 3 * e[0].error_estimate + 1e-9);
  EXPECT_NEAR(e[1].value - e[0].value, 3.0, 3 * (e[0].error_estimate + e[1].error_estimate) + 1e-9);
  EXPECT_NEAR(e[1].extrapolated() - e[0].extrapolated(), 3.0, 1e-3);
}

TEST(Dirichlet2D, DiskAgainstBesselZeros) {
  const auto e = dirichlet_eigs(make_disk(), 2);
  EXPECT_NEAR(e[0].value / (j01 * j01), 1, 5e-3);
  EXPECT_NEAR(e[1].value / (j11 * j11), 1, 5e-3);
}

TEST(Dirichlet2D, SecondOrderOnSquare) {
  const double exact = 2 * kPi * kPi;
  const double e1 = std::abs(dirichlet_eigs(make_square(), 1, with_delta(1.0 / 30))[0].value - exact);
  const double e2 = std::abs(dirichlet_eigs(make_square(), 1, with_delta(1.0 / 60))[0].value - exact);
  EXPECT_GE(e1 / e2, 3.5);
}

TEST(Dirichlet2D, PositivityAndOrthogonality) {
  for (const auto& P : {make_square(), make_disk(), make_random_polygon(6, 7)}) {
    const auto e = dirichlet_eigs(P, 2);
    EXPECT_GT(e[0].function.values.minCoeff(), 0);
    const double cross = e[0].function.values.dot(e[1].function.values) * e[0].function.grid->cell_area();
    EXPECT_LT(std::abs(cross), 1e-8);
    EXPECT_NEAR(e[0].function.integral_sq(), 1, 1e-12);
  }
}

TEST(Dirichlet2D, DomainMonotonicity) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto P = make_random_polygon(5 + trial % 4, 40 + trial);
    const double ang = rng.uniform(0, 2 * kPi);
    const auto [lo, hi] = projection_range(P, unit(ang));
    const auto inner = halfplane_cut(P, ang, lo + rng.uniform(0.7, 0.9) * (hi - lo)).first;
    // Same spacing on both so the comparison is between like discretizations.
    const double d = default_delta(inner);
    const auto a = dirichlet_eigs(P, 1, with_delta(d))[0];
    const auto b = dirichlet_eigs(inner, 1, with_delta(d))[0];
    EXPECT_GE(b.value, a.value - (a.tol() + b.tol()));
  }
}

TEST(Dirichlet2D, LogConcaveAlongSegments) {
  for (const auto& P : {make_square(), make_random_polygon(6, 3)}) {
    const double d = default_delta(P);
    const auto fine = dirichlet_eigs(P, 1, with_delta(d))[0].function;
    const auto coarse = dirichlet_eigs(P, 1, with_delta(2 * d))[0].function;
    Rng rng(9);
    double xmin, xmax, ymin, ymax;
    P.bbox(xmin, xmax, ymin, ymax);
    int checked = 0;
    while (checked < 100) {
      const Point a{rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)};
      const Point b{rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)};
      if (P.inside_distance(a) < 4 * 2 * d || P.inside_distance(b) < 4 * 2 * d) continue;
      const Point m = (a + b) * 0.5;
      auto defect = [&](const GridFunction2D& u) {
        return std::log(u(m)) - 0.5 * (std::log(u(a)) + std::log(u(b)));
      };
      const double df = defect(fine), dc = defect(coarse);
      EXPECT_GE(df, -3 * std::abs(df - dc) - 1e-12);
      ++checked;
    }
  }
}

TEST(Dirichlet2D, ImprovedLogConcavityOnSquare) {
  const auto r = log_concavity_check(make_square(), 100, 17);
  EXPECT_EQ(r.pairs, 100);
  EXPECT_EQ(r.violations, 0);
}

TEST(Dirichlet2D, PotentialShiftsSpectrum) {
  Solve2DOptions o;
  o.potential = [](const Point&) { return 2.5; };
  const auto a = dirichlet_eigs(make_square(), 2);
  const auto b = dirichlet_eigs(make_square(), 2, o);
  EXPECT_NEAR(b[0].value - a[0].value, 2.5, 1e-8);
  EXPECT_NEAR(b[1].value - a[1].value, 2.5, 1e-8);
}

TEST(Dirichlet2D, RejectsBadCount) { EXPECT_THROW(dirichlet_eigs(make_square(), 4), InvalidInput); }

TEST(Neumann2D, SquareAndRectangle) {
  const auto s = neumann_eig1(make_square(), with_delta(1.0 / 120));
  EXPECT_NEAR(s.value / (kPi * kPi), 1, 5e-3);
  const double d = 2, eps = 0.5;
  const auto r = neumann_eig1(make_rectangle(d, eps));
  EXPECT_NEAR(r.value, kPi * kPi / (d * d), 3 * r.error_estimate + 1e-9);
}

TEST(Neumann2D, DiskAgainstBesselDerivativeZero) {
  const auto e = neumann_eig1(make_disk());
  EXPECT_NEAR(e.value / (jp11 * jp11), 1, 1.5e-2);
  EXPECT_LE(std::abs(e.value - jp11 * jp11), 3 * e.error_estimate);
}

TEST(WeightedNeumann2D, UnitWeightReducesToNeumann) {
  const auto P = make_random_polygon(6, 11);
  const auto a = neumann_eig1(P);
  const auto b = weighted_neumann_eig1(P, weight_from_function([](const Point&) { return 1.0; }));
  EXPECT_NEAR(a.value, b.value, 1e-9 * a.value);
  EXPECT_EQ(b.kind, EigenKind::WeightedNeumann);
}

TEST(WeightedNeumann2D, CosineSquaredStripTendsToThree) {
  const Interval I{-kPi / 2, kPi / 2};
  const auto one = neumann_weighted_eig1(I, Weight1D{I, [](double x) { return std::cos(x) * std::cos(x); }});
  const auto P = ConvexPolygon::make({{I.a, 0}, {I.b, 0}, {I.b, 0.1}, {I.a, 0.1}});
  const auto e = weighted_neumann_eig1(P, weight_from_function([](const Point& p) { return std::cos(p.x) * std::cos(p.x); }));
  EXPECT_NEAR(one.extrapolated_value, 3.0, 1e-3);
  EXPECT_NEAR(e.value, one.extrapolated_value, 3 * e.error_estimate + one.tol());
}

TEST(WeightedNeumann2D, RejectsNegativeWeight) {
  EXPECT_THROW(weighted_neumann_eig1(make_square(), weight_from_function([](const Point& p) { return p.x - 0.5; })),
               DegenerateWeight);
}

TEST(GapIdentity, SquareDiskHexagon) {
  for (const auto& P : {make_square(), make_disk(), make_random_polygon(6, 7)}) {
    const auto r = gap_identity_check(P);
    EXPECT_TRUE(r.pass) << "spread " << r.spread;
    EXPECT_LT(r.spread, 0.03);
  }
  const auto sq = gap_identity_check(make_square());
  EXPECT_NEAR(sq.gap / (3 * kPi * kPi), 1, 5e-3);
  const auto disk = gap_identity_check(make_disk());
  EXPECT_NEAR(disk.gap, j11 * j11 - j01 * j01, 0.01 * disk.gap);
}

TEST(LinfBound, SquareAndRectangles) {
  const auto sq = linf_bound_check(make_square(), {});
  EXPECT_TRUE(sq.finite);
  // The first Neumann eigenspace of the square is spanned by cos(pi x), cos(pi y),
  // so the ratio lies between sqrt 2 (a pure mode) and 2 (equal mix).
  EXPECT_GE(sq.ratio, std::sqrt(2.0) - 1e-3);
  EXPECT_LE(sq.ratio, 2.0 + 1e-3);
  const auto rect = linf_bound_check(make_rectangle(1.3, 1), {});
  EXPECT_NEAR(rect.ratio, std::sqrt(2 / 1.3), 2e-3);

  double cmax = 0, cmin = 1e300;
  for (double eps : {0.4, 0.2, 0.1}) {
    const auto r = linf_bound_check(make_rectangle(kPi, eps), {});
    ASSERT_TRUE(r.finite);
    cmax = std::max(cmax, r.implied_constant);
    cmin = std::min(cmin, r.implied_constant);
  }
  EXPECT_LT(cmax / cmin, 4.0);

  const auto ramp = linf_bound_check(make_square(), weight_from_function([](const Point& p) { return 1 + p.x; }), 1);
  EXPECT_TRUE(ramp.finite);
}

TEST(Collapsing, ConstantWeightTendsToOne) {
  const auto r = collapsing_check({0, kPi}, [](double) { return 1.0; }, {0.2, 0.1, 0.05}, 16);
  EXPECT_NEAR(r.mu_1d, 1.0, 1e-6);
  for (const auto& e : r.entries) EXPECT_NEAR(e.mu, 1.0, 3 * e.error + 1e-6);
}

TEST(Collapsing, CosineWeightConverges) {
  const auto r = collapsing_check(kIpi, [](double x) { return std::cos(x); }, {0.2, 0.1, 0.05}, 16);
  ASSERT_EQ(r.entries.size(), 3u);
  EXPECT_LT(r.entries.back().rel_diff, 0.02);
  EXPECT_TRUE(r.monotone);
}

TEST(Collapsing, TriangularRampTrend) {
  const auto r = collapsing_check({0, 2}, [](double x) { return 1 - 0.5 * x; }, {0.2, 0.1, 0.05}, 16);
  EXPECT_TRUE(r.monotone);
  EXPECT_LT(r.entries.back().rel_diff, r.entries.front().rel_diff + 1e-3);
}
