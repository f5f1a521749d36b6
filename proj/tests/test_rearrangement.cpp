#include <gtest/gtest.h>

#include <cmath>

#include "gaplab/rearrangement.hpp"

using namespace gaplab;

namespace {

PiecewiseLinear pl(std::vector<double> x, std::vector<double> y) { return {std::move(x), std::move(y)}; }

GridFunction1D sampled(const std::function<double(double)>& f, int n = 256) {
  const Grid1D g{kIpi, n};
  GridFunction1D out{g, std::vector<double>(n + 1)};
  for (int i = 0; i <= n; ++i) out.values[i] = (i == 0 || i == n) ? 0.0 : f(g.x(i));
  return out;
}

// Three bumps: lowest minimum between the first and the other two.
PiecewiseLinear three_bumps() {
  return pl({-kPi / 2, -1.0, -0.5, 0.0, 0.5, 1.0, kPi / 2}, {0, 2, 0.5, 3, 1.5, 2.5, 0});
}

}  // namespace

TEST(SymmetricDecreasing, IdentityOnSymmetricDecreasingInput) {
  const auto v = pl({-kPi / 2, -0.4, 0.0, 0.4, kPi / 2}, {0, 0.8, 1.0, 0.8, 0});
  const auto s = symmetric_decreasing(v, kIpi);
  for (double x = -1.5; x <= 1.5; x += 0.05) EXPECT_NEAR(s(x), v(x), 1e-12);
  const auto c = PiecewiseLinear::from_grid(sampled([](double x) { return std::pow(std::cos(x), 2); }));
  const auto cs = symmetric_decreasing(c, kIpi);
  for (double x = -1.5; x <= 1.5; x += 0.05) EXPECT_NEAR(cs(x), c(x), 1e-12);
}

TEST(SymmetricDecreasing, AsymmetricTentBecomesSymmetricTent) {
  const auto v = pl({-kPi / 2, -1.0, kPi / 2}, {0, 1, 0});
  const auto s = symmetric_decreasing(v, kIpi);
  // |{v > t}| = (1 - t) pi, so v*(x) = 1 - |x| / (pi / 2).
  for (double x = -1.5; x <= 1.5; x += 0.1) EXPECT_NEAR(s(x), 1 - std::abs(x) / (kPi / 2), 1e-12);
}

TEST(BlockedRearrangement, SingleBumpIsSymmetricDecreasing) {
  const auto v = pl({-kPi / 2, 0.7, kPi / 2}, {0, 2, 0});
  const auto b = blocked_rearrangement(v, kIpi);
  const auto s = symmetric_decreasing(v, kIpi);
  for (double x = -1.5; x <= 1.5; x += 0.05) EXPECT_NEAR(b(x), s(x), 1e-12);
}

TEST(BlockedRearrangement, DoubleBumpKeepsLevelSetsAndTranslatesTop) {
  const auto v = pl({-kPi / 2, -1.0, -0.2, 0.6, kPi / 2}, {0, 2, 0.7, 1.3, 0});
  const auto r = blocked_rearrangement_detail(v, kIpi);
  ASSERT_TRUE(r.has_minimum);
  EXPECT_DOUBLE_EQ(r.level, 0.7);
  for (int i = 0; i <= 64; ++i) {
    const double t = 2.0 * i / 64;
    EXPECT_NEAR(r.w.level_measure(t), v.level_measure(t), 1e-12);
  }
  // Above the level, the output is v moved so that the midpoint of {v > level} sits at 0.
  EXPECT_NEAR(r.shift, -0.5 * (r.c + r.d), 1e-15);
  for (double x = r.c + 0.01; x < r.d; x += 0.05) EXPECT_NEAR(r.w(x + r.shift), v(x), 1e-12);
  EXPECT_NEAR(r.split[1], -0.2 + r.shift, 1e-15);
}

TEST(BlockedRearrangement, MinimumAtBoundaryLevelIsCaseOne) {
  const auto v = pl({-kPi / 2, -1.0, -0.2, 0.6, kPi / 2}, {0, 2, 0.0, 1.3, 0});
  const auto r = blocked_rearrangement_detail(v, kIpi);
  EXPECT_FALSE(r.has_minimum);
}

TEST(TestFunctionValidation, RejectsTiesAndPlateaus) {
  EXPECT_THROW(TestFunction::make(pl({-1.5, -1, -0.5, 0, 0.5, 1, 1.5}, {0, 2, 1, 2, 1, 2, 0})), InvalidInput);
  EXPECT_THROW(TestFunction::make(pl({-1.5, -1, -0.5, 0, 0.5, 1.5}, {0, 2, 1, 1, 2, 0})), InvalidInput);
  EXPECT_THROW(TestFunction::make(pl({-1.5, 0, 1.5}, {0, 2, 0.5})), InvalidInput);
  EXPECT_NO_THROW(TestFunction::make(three_bumps()));
}

TEST(Stratified, UnimodalHasNoBranching) {
  const auto v = TestFunction::make(pl({-kPi / 2, 0.5, kPi / 2}, {0, 1, 0}));
  const auto d = stratified(v);
  EXPECT_TRUE(d.gamma.empty());
  ASSERT_EQ(d.nodes.size(), 1u);
  const auto s = symmetric_decreasing(v.f, kIpi);
  for (double x = -1.5; x <= 1.5; x += 0.05) {
    EXPECT_NEAR(d.rearranged(x), s(x), 1e-12);
    EXPECT_NEAR(d.potential(x), 1 + std::pow(std::tan(x), 2), 1e-12);
  }
  EXPECT_TRUE(d.constraints().empty());
}

TEST(Stratified, ThreeBumpTree) {
  const auto d = stratified(TestFunction::make(three_bumps()));
  std::vector<std::string> idx;
  for (const auto& n : d.nodes) idx.push_back(multi_index_string(n.index));
  std::sort(idx.begin(), idx.end());
  EXPECT_EQ(idx, (std::vector<std::string>{"(1)", "(1,1)", "(1,2)", "(1,2,1)", "(1,2,2)"}));
  std::vector<std::string> gamma;
  for (int g : d.gamma) gamma.push_back(multi_index_string(d.nodes[g].index));
  std::sort(gamma.begin(), gamma.end());
  EXPECT_EQ(gamma, (std::vector<std::string>{"(1)", "(1,2)"}));
  // Leaves: symmetric about their midpoints.
  for (const auto& n : d.nodes) {
    if (n.branching()) continue;
    for (double s = 0; s < n.interval.length() / 2; s += n.interval.length() / 40)
      EXPECT_NEAR(d.rearranged(n.mid() + s), d.rearranged(n.mid() - s), 1e-12);
  }
  // Children nest inside parents and are disjoint.
  for (const auto& n : d.nodes) {
    if (!n.branching()) continue;
    const auto& c1 = d.nodes[n.child[0]].interval;
    const auto& c2 = d.nodes[n.child[1]].interval;
    EXPECT_TRUE(n.interval.contains(c1));
    EXPECT_TRUE(n.interval.contains(c2));
    EXPECT_LE(c1.b, c2.a + 1e-15);
  }
}

TEST(Stratified, TwoEqualBumps) {
  const auto d = stratified(TestFunction::make(pl({-kPi / 2, -0.8, 0.0, 0.8, kPi / 2}, {0, 1, 0.3, 1, 0})));
  ASSERT_EQ(d.gamma.size(), 1u);
  const auto& root = d.nodes[d.gamma[0]];
  EXPECT_NEAR(d.nodes[root.child[0]].interval.length(), d.nodes[root.child[1]].interval.length(), 1e-12);
}

TEST(Stratified, EquimeasurableAndEnergyDecreasing) {
  Rng rng(31);
  for (int s = 0; s < 30; ++s) {
    const auto v = random_test_function(rng, kIpi, 256, 5);
    const auto d = stratified(v);
    const double top = v.f.max_value();
    const double dx = kPi / 256;
    for (int i = 0; i < 64; ++i) {
      const double t = top * i / 64;
      EXPECT_NEAR(d.rearranged.level_measure(t), v.f.level_measure(t), 2 * dx);
    }
    EXPECT_LE(d.rearranged.dirichlet_energy(), v.f.dirichlet_energy() * (1 + 1e-12));
    EXPECT_NEAR(d.rearranged.integral_sq(), v.f.integral_sq(), 1e-10 * v.f.integral_sq());
    // Own regions of the tree nodes tile the interval.
    double total = 0;
    for (const auto& n : d.nodes) {
      double own = n.interval.length();
      if (n.branching()) own -= n.split[2] - n.split[0];
      EXPECT_GE(own, -1e-14);
      total += own;
    }
    EXPECT_NEAR(total, kPi, 1e-12);
  }
}

TEST(RearrangementInequality, CosSquaredWithTangent) {
  const auto v = TestFunction::from_grid(sampled([](double x) { return std::pow(std::cos(x), 2); }, 512));
  const auto r = check_rearrangement_inequality(tan_profile(), v);
  EXPECT_FALSE(r.vacuous);
  EXPECT_TRUE(r.pass);
  // Symmetric unimodal v with psi = tan: both sides coincide.
  EXPECT_NEAR(r.lhs, r.rhs, 1e-9 * r.lhs);
}

TEST(RearrangementInequality, BranchingFunctionHasPositiveSlack) {
  Rng rng(3);
  const auto psi = make_class_A_profile(random_class_A_params(rng, 1));
  const Interval S{psi.dom.a + 0.05, psi.dom.b - 0.05};
  const auto v = TestFunction::make(PiecewiseLinear::from_grid(sampled(
      [&](double x) {
        if (!S.contains(x)) return 0.0;
        const double s = std::sin(kPi * (x - S.a) / S.length());
        return s * s * (1 + 2 * std::exp(-40 * std::pow(x - S.mid() - 0.4, 2)));
      },
      512)));
  const auto r = check_rearrangement_inequality(psi, v);
  EXPECT_FALSE(r.vacuous);
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.slack, 0);
}

TEST(RearrangementInequality, VacuousOutsideDomain) {
  MonotoneProfile psi = tan_profile({-1.0, 1.0});
  const auto v = TestFunction::from_grid(sampled([](double x) { return std::pow(std::cos(x), 2); }));
  const auto r = check_rearrangement_inequality(psi, v);
  EXPECT_TRUE(r.vacuous);
  EXPECT_TRUE(r.pass);
}

TEST(RearrangementInequality, RandomPairsHold) {
  Rng rng(17);
  for (int s = 0; s < 40; ++s) {
    const auto psi = make_class_A_profile(random_class_A_params(rng, s), 512);
    const double margin = 2 * kPi / 512;
    const Interval S{psi.dom.a + margin + rng.uniform(0, 0.3), psi.dom.b - margin - rng.uniform(0, 0.3)};
    const auto v = random_test_function(rng, S, 512, 4);
    const auto r = check_rearrangement_inequality(psi, v);
    EXPECT_FALSE(r.vacuous);
    EXPECT_GE(r.slack, -1e-8 * (std::abs(r.lhs) + std::abs(r.rhs))) << "pair " << s;
  }
}

TEST(Eta1, NoBranchingGivesFour) {
  const auto d = stratified(TestFunction::make(pl({-kPi / 2, 0.2, kPi / 2}, {0, 1, 0})));
  const auto r = eta1_stratified(d, 1024);
  EXPECT_NEAR(r.extrapolated_value, 4.0, 1e-3);
}

TEST(Eta1, SymmetricBranchingIsStrictlyAboveFour) {
  const auto d = stratified(TestFunction::make(pl({-kPi / 2, -0.8, 0.0, 0.8, kPi / 2}, {0, 1, 0.3, 1, 0})));
  ASSERT_EQ(d.constraints().size(), 1u);
  const auto r = eta1_stratified(d, 1024);
  EXPECT_GT(r.extrapolated_value - 4, r.tol());
}

TEST(Eta1, UnconstrainedReducesToPlainEigenvalue) {
  auto V = [](double x) { return 1 + 0.5 * x * x + std::sin(x); };
  const Grid1D g{kIpi, 4096};
  GridFunction1D Vs{g, std::vector<double>(g.n + 1)};
  for (int i = 0; i <= g.n; ++i) Vs.values[i] = V(g.x(i));
  const auto e = eta1_stratified(Vs, {}, 1024);
  const auto l = dirichlet_eig1(kIpi, MeasurePotential::smooth([&](double x) { return 2 * V(x); }), 1024);
  EXPECT_NEAR(e.extrapolated_value, l.extrapolated_value, 1e-5);
}

TEST(Eta1, RandomStratifiedPotentialsStayAboveFour) {
  Rng rng(23);
  for (int s = 0; s < 10; ++s) {
    const auto d = stratified(random_test_function(rng, kIpi, 256, 5));
    const auto r = eta1_stratified(d, 512);
    EXPECT_GE(r.extrapolated_value, 4 - r.tol()) << "sample " << s << " branching " << d.gamma.size();
  }
}
