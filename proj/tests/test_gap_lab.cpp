#include <gtest/gtest.h>

#include <cmath>

#include "gaplab/gap_lab.hpp"

using namespace gaplab;

namespace {

// Root of f in [a, b] by bisection; f changes sign on the bracket.
template <class F>
double bisect_root(F f, double a, double b) {
  double fa = f(a);
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

double j01() { return bisect_root([](double x) { return std::cyl_bessel_j(0.0, x); }, 2, 3); }
double j11() { return bisect_root([](double x) { return std::cyl_bessel_j(1.0, x); }, 3.5, 4.2); }
double j11_prime() {
  return bisect_root([](double x) { return std::cyl_bessel_j(0.0, x) - std::cyl_bessel_j(2.0, x); }, 1.5, 2.2);
}

}  // namespace

TEST(VerifyGap, ThinRectangleIsSeparable) {
  const double eps = 0.2;
  const auto r = verify_gap(make_rectangle(kPi, eps));
  EXPECT_NEAR(r.gap, 3.0, 1e-4);
  EXPECT_NEAR(r.gap_floor, 3 * kPi * kPi / (kPi * kPi + eps * eps), 1e-12);
  EXPECT_NEAR(r.gap_excess, 3 * eps * eps / (kPi * kPi + eps * eps), 1e-4);
  EXPECT_TRUE(r.nondegenerate);
  EXPECT_TRUE(r.pass());
  EXPECT_NEAR(r.w, eps, 1e-14);
  EXPECT_NEAR(r.a2, eps / 2, 1e-6);
}

TEST(VerifyGap, SquareAndDisk) {
  const auto s = verify_gap(make_square());
  EXPECT_NEAR(s.gap / (3 * kPi * kPi), 1, 1e-3);
  EXPECT_NEAR(s.gap_floor, 1.5 * kPi * kPi, 1e-12);
  EXPECT_TRUE(s.pass());

  const double a = j01(), b = j11();
  const auto d = verify_gap(make_disk());
  EXPECT_NEAR(d.gap / (b * b - a * a), 1, 5e-3);
  EXPECT_NEAR(d.gap_floor, 0.75 * kPi * kPi, 1e-4);
  EXPECT_TRUE(d.pass());
  EXPECT_GT(d.implied_cbar, 0);
}

TEST(VerifyGap, FloorOnRandomPolygons) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto r = verify_gap(make_random_polygon(6 + static_cast<int>(seed % 4), seed));
    EXPECT_TRUE(r.pass()) << "seed " << seed << " gap " << r.gap << " floor " << r.gap_floor;
    if (r.nondegenerate) {
      EXPECT_GT(r.gap_excess, 3 * r.gap_error);
    }
  }
}

TEST(VerifyNeumann, SquareDiskRectangle) {
  const auto s = verify_neumann(make_square());
  EXPECT_NEAR(s.mu1 / (kPi * kPi), 1, 1e-3);
  EXPECT_TRUE(s.pass());

  const double jp = j11_prime();
  const auto d = verify_neumann(make_disk());
  EXPECT_NEAR(d.mu1 / (jp * jp), 1, 1e-2);
  EXPECT_NEAR(d.neumann_floor, 0.25 * kPi * kPi, 1e-4);
  EXPECT_TRUE(d.pass());

  const auto r = verify_neumann(make_rectangle(kPi, 0.1));
  EXPECT_NEAR(r.mu1, 1.0, 1e-6);
  EXPECT_TRUE(r.pass());
}

TEST(NeumannExpansion, ThinRectanglesApproachPrediction) {
  const auto r = neumann_expansion({0.2, 0.1, 0.05});
  ASSERT_EQ(r.entries.size(), 3u);
  EXPECT_TRUE(r.pass);
  // Exact value: excess / eps^2 = 1 / (pi^2 + eps^2), prediction pi^2 / (pi^2 + eps^2)^2.
  for (const auto& e : r.entries) {
    const double exact = 1 / (kPi * kPi + e.eps * e.eps);
    EXPECT_NEAR(e.normalized / exact, 1, 0.01) << "eps " << e.eps;
  }
  EXPECT_LT(r.entries.back().rel_diff, r.entries.front().rel_diff);
}

TEST(ExponentSweep, RectanglesHaveSlopeTwo) {
  for (auto kind : {SweepKind::Dirichlet, SweepKind::Neumann}) {
    const auto f = exponent_sweep(make_family("rects"), kind);
    EXPECT_TRUE(f.slope_asserted);
    EXPECT_EQ(f.fitted_points, 4);
    EXPECT_NEAR(f.slope, 2, 0.1) << to_string(kind);
    EXPECT_TRUE(f.pass);
    EXPECT_GT(f.min_implied, 0);
    for (std::size_t i = 1; i < f.members.size(); ++i) EXPECT_LT(f.params[i - 1], f.params[i]);
  }
}

TEST(ExponentSweep, OtherFamiliesReportOnly) {
  const auto f = exponent_sweep(make_family("sectors"), SweepKind::Dirichlet);
  EXPECT_FALSE(f.slope_asserted);
  EXPECT_TRUE(std::isfinite(f.slope));
  EXPECT_TRUE(f.pass);
}

TEST(ExponentSweep, TooFewPointsAndUnknownFamily) {
  Family fam = make_family("rects");
  fam.params = {0.4, 0.2, 0.1};
  EXPECT_THROW(exponent_sweep(fam, SweepKind::Neumann), FitUnderdetermined);
  EXPECT_THROW(make_family("blobs"), InvalidInput);
}

TEST(ExponentSweep, ParallelMatchesSerial) {
  const auto fam = make_family("ngons");
  const auto a = exponent_sweep(fam, SweepKind::Neumann, {16, 1});
  const auto b = exponent_sweep(fam, SweepKind::Neumann, {16, 3});
  ASSERT_EQ(a.members.size(), b.members.size());
  for (std::size_t i = 0; i < a.members.size(); ++i) EXPECT_EQ(a.members[i].mu1, b.members[i].mu1);
  EXPECT_EQ(a.slope, b.slope);
}

TEST(Localized, MidlineOfThinRectangle) {
  // u_1^2 restricted to the midline is proportional to sin^2, whose weighted
  // Neumann eigenvalue on (0, pi) is 3.
  const double eps = 0.2;
  const auto P = make_rectangle(kPi, eps);
  const auto r = verify_localized(P, Chord{{0, eps / 2}, {kPi, eps / 2}, kPi}, [](double) { return 1.0; });
  EXPECT_NEAR(r.mu, 3.0, 1e-3);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.excess, 3 * eps * eps / (kPi * kPi + eps * eps), 1e-3);
  EXPECT_GT(r.implied_C, 0);
}

TEST(Localized, ShortChordHasLargeExcess) {
  const auto P = make_square();
  const auto ctx = LocalizedContext::make(P);
  const double D = std::sqrt(2.0);
  const Chord full{{0, 0}, {1, 1}, D};
  const Chord half{{0.25, 0.25}, {0.75, 0.75}, D / 2};
  const auto a = verify_localized(ctx, full, [](double) { return 1.0; });
  const auto b = verify_localized(ctx, half, [](double) { return 1.0; });
  EXPECT_TRUE(a.pass);
  EXPECT_TRUE(b.pass);
  // Along the diagonal u_1^2 = sin^4(pi t / D); weight sin^4 on (0, pi) has eigenvalue 5.
  EXPECT_NEAR(a.mu, 5 * kPi * kPi / 2, 1e-3);
  EXPECT_GT(b.excess, 1.5 * a.excess);
  EXPECT_GT(b.implied_C, 0);
  EXPECT_FALSE(std::isfinite(a.implied_C));

  // Concave weight: tent on the chord, m = 1.
  const auto c = verify_localized(ctx, half, [&](double t) { return 1 + std::min(t, half.length - t); });
  EXPECT_TRUE(c.pass);
}

TEST(Localized, Preconditions) {
  const auto P = make_square();
  const auto ctx = LocalizedContext::make(P);
  const Chord c{{0, 0.5}, {1, 0.5}, 1};
  EXPECT_THROW(verify_localized(ctx, c, [](double t) { return 1 + (t - 0.5) * (t - 0.5); }), PreconditionFailed);
  EXPECT_THROW(verify_localized(ctx, c, [](double) { return -1.0; }), PreconditionFailed);
  EXPECT_THROW(verify_localized(ctx, Chord{{0, 0}, {2, 2}, std::sqrt(8.0)}, [](double) { return 1.0; }), InvalidChord);
}

TEST(Localized, RandomChordsHaveNoViolations) {
  for (const auto& P : {make_square(), make_ngon(5)}) {
    const auto s = localized_sweep(P, 12, 5);
    EXPECT_EQ(s.violations, 0);
    EXPECT_GT(s.min_implied_C, 0);
    for (const auto& r : s.chords) EXPECT_LT(r.tol, 0.1 * r.bound);
  }
}

TEST(Schrodinger, TrendTowardStripGap) {
  Solve2DOptions o;
  o.delta = 0.02;
  const auto free = schrodinger_counterexample(std::numeric_limits<double>::infinity(), 0.3, o);
  const auto empty = schrodinger_counterexample(0.1, 1.0, o);
  EXPECT_EQ(free.gap, empty.gap);
  EXPECT_GT(free.excess, 3 * free.gap_error);

  const auto a = schrodinger_counterexample(0.1, 0.3, o);
  EXPECT_GT(a.gap, a.floor);
  EXPECT_LT(a.gap, a.strip_upper);

  // Decreasing delta, then decreasing eps, lowers the gap toward 3 pi^2 / 4.
  const auto b = schrodinger_counterexample(1e-3, 0.3, o);
  const auto c = schrodinger_counterexample(1e-3, 0.2, o);
  EXPECT_LT(b.gap, a.gap);
  EXPECT_LT(c.gap, b.gap);
  EXPECT_GT(c.gap, c.floor);
  EXPECT_LT(c.gap, c.strip_upper);
  EXPECT_NEAR(diamond_strip_upper(0.3), kPi * kPi / 0.49 - kPi * kPi / 4, 1e-12);

  EXPECT_THROW(schrodinger_counterexample(0.1, 0, o), InvalidInput);
  EXPECT_THROW(schrodinger_counterexample(-1, 0.3, o), InvalidInput);
}
