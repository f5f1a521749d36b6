// Acceptance suite: one line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gaplab/gap_lab.hpp"
#include "gaplab/partition.hpp"
#include "gaplab/rearrangement.hpp"

using namespace gaplab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds; 0 for none
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

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

Outcome sharp_values() {
  struct Case {
    const char* label;
    std::function<double(double)> q;
    double expected;
  };
  const std::vector<Case> cases = {
      {"1+2tan^2", [](double x) { return 1 + 2 * std::tan(x) * std::tan(x); }, 3},
      {"2tan^2", [](double x) { return 2 * std::tan(x) * std::tan(x); }, 2},
      {"2(1+tan^2)", [](double x) { return 2 * (1 + std::tan(x) * std::tan(x)); }, 4},
  };
  Outcome o{true, ""};
  for (const auto& c : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = dirichlet_eig1(kIpi, MeasurePotential::smooth(c.q), 4096);
    const double t = seconds_since(t0);
    const double err = std::abs(r.extrapolated_value - c.expected);
    o.pass = o.pass && err <= 1e-3 && t < 1;
    o.detail += fmt("%s: %.6f (err %.1e, %.2fs) ", c.label, r.extrapolated_value, err, t);
  }
  return o;
}

Outcome class_A_minimality() {
  Rng rng(2024);
  int violations = 0;
  double min_lambda = 1e300, tan_lambda = 0;
  int argmin = -1;
  for (int i = 0; i < 200; ++i) {
    const auto psi = make_class_A_profile(random_class_A_params(rng, i));
    const auto r = check_bound_stima3(psi);
    // r.tol is 3 x two-grid error plus the rounding floor of the fine solve.
    if (!r.pass) ++violations;
    if (i == 0) tan_lambda = r.lambda;
    if (r.lambda < min_lambda) {
      min_lambda = r.lambda;
      argmin = i;
    }
  }
  const bool attained = std::abs(min_lambda - tan_lambda) <= 1e-2;
  return {violations == 0 && attained,
          fmt("violations %d, min %.6f at sample %d, tan %.6f", violations, min_lambda, argmin, tan_lambda)};
}

Outcome truncation_exponent() {
  std::vector<double> lx, ly;
  std::string detail;
  double full_excess = 0;
  for (int k = 4; k <= 8; ++k) {
    const double d = kPi * k / 8;
    const auto r = check_bound_stima3(tan_profile({-d / 2, d / 2}), 4096);
    detail += fmt("k=%d excess %.3e; ", k, r.excess);
    if (k == 8) {
      full_excess = r.excess;
    } else {
      lx.push_back(std::log(kPi - d));
      ly.push_back(std::log(r.excess));
    }
  }
  const auto f = fit_line(lx, ly);
  return {std::abs(f.slope - 3) <= 0.3 && std::abs(full_excess) <= 1e-3,
          detail + fmt("slope %.4f", f.slope)};
}

Outcome rearrangement_inequality() {
  Rng rng(31);
  int violations = 0, vacuous = 0;
  double worst_rel = 1e300;
  for (int s = 0; s < 200; ++s) {
    const auto psi = make_class_A_profile(random_class_A_params(rng, s), 512);
    const double margin = 2 * kPi / 512;
    const Interval S{psi.dom.a + margin + rng.uniform(0, 0.3), psi.dom.b - margin - rng.uniform(0, 0.3)};
    const auto v = random_test_function(rng, S, 512, 4);
    const auto r = check_rearrangement_inequality(psi, v);
    if (r.vacuous) {
      ++vacuous;
      continue;
    }
    if (!r.pass) ++violations;
    worst_rel = std::min(worst_rel, r.slack / std::max(std::abs(r.lhs), std::abs(r.rhs)));
  }
  return {violations == 0,
          fmt("violations %d, vacuous %d, worst relative slack %.3e", violations, vacuous, worst_rel)};
}

Outcome stratified_bound() {
  Rng rng(41);
  int violations = 0, branched = 0;
  double min_eta = 1e300;
  for (int s = 0; s < 50; ++s) {
    const auto d = stratified(random_test_function(rng, kIpi, 512, 8));
    if (!d.gamma.empty()) ++branched;
    const auto r = eta1_stratified(d, 1024);
    if (r.extrapolated_value < 4 - r.tol()) ++violations;
    min_eta = std::min(min_eta, r.extrapolated_value);
  }
  const auto empty = stratified(TestFunction::make(PiecewiseLinear{{-kPi / 2, 0.2, kPi / 2}, {0, 1, 0}}));
  const double e0 = eta1_stratified(empty, 1024).extrapolated_value;
  const bool equality = empty.gamma.empty() && std::abs(e0 - 4) <= 1e-3;
  return {violations == 0 && equality,
          fmt("violations %d, branched %d/50, min eta1 %.6f, no branching %.6f", violations, branched, min_eta, e0)};
}

Outcome reference_spectra() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto P = make_square();
  Solve2DOptions o;
  o.delta = 1.0 / 120;
  const auto d = dirichlet_eigs(P, 2, o);
  const auto n = neumann_eig1(P, o);
  const double t = seconds_since(t0);
  const double pi2 = kPi * kPi;
  const double e1 = std::abs(d[0].extrapolated() / (2 * pi2) - 1);
  const double e2 = std::abs(d[1].extrapolated() / (5 * pi2) - 1);
  const double e3 = std::abs(n.extrapolated() / pi2 - 1);
  const double j01 = bisect_root([](double x) { return std::cyl_bessel_j(0.0, x); }, 2, 3);
  const auto disk = dirichlet_eigs(make_disk(), 1);
  const double e4 = std::abs(disk[0].extrapolated() / (j01 * j01) - 1);
  const bool pass = e1 <= 5e-3 && e2 <= 5e-3 && e3 <= 5e-3 && t < 30 && e4 <= 5e-3;
  return {pass, fmt("square rel err %.1e %.1e %.1e (%.1fs), disk %.5f vs %.5f rel err %.1e", e1, e2, e3, t,
                    disk[0].extrapolated(), j01 * j01, e4)};
}

Outcome gap_identity() {
  std::vector<std::pair<std::string, ConvexPolygon>> doms = {{"square", make_square()}, {"disk", make_disk()}};
  for (std::uint64_t s = 1; s <= 5; ++s) doms.push_back({"hex" + std::to_string(s), make_random_polygon(6, s)});
  bool pass = true;
  std::string detail;
  double worst = 0;
  for (const auto& [name, P] : doms) {
    const auto r = gap_identity_check(P);
    pass = pass && r.pass;
    worst = std::max(worst, r.spread);
    detail += fmt("%s %.4f; ", name.c_str(), r.spread);
  }
  return {pass, detail + fmt("worst spread %.4f", worst)};
}

Outcome neumann_expansion_rate() {
  const auto e = neumann_expansion({0.2, 0.1, 0.05});
  const auto f = exponent_sweep(make_family("rects"), SweepKind::Neumann);
  return {e.pass && std::abs(f.slope - 2) <= 0.1,
          fmt("rel diff at eps 0.05 %.2e, slope %.4f", e.entries.back().rel_diff, f.slope)};
}

Outcome gap_floor_random() {
  const auto t0 = std::chrono::steady_clock::now();
  int floor_fail = 0, strict_fail = 0, nondeg = 0;
  double min_cbar = 1e300;
  for (std::uint64_t s = 1; s <= 50; ++s) {
    const auto r = verify_gap(make_random_polygon(5 + static_cast<int>(s % 6), 1000 + s));
    for (const auto& c : r.checks)
      if (c.name == "gap_floor" && !c.pass) ++floor_fail;
    if (r.nondegenerate) {
      ++nondeg;
      if (!(r.gap_excess > 3 * r.gap_error)) ++strict_fail;
      min_cbar = std::min(min_cbar, r.implied_cbar);
    }
  }
  const double t = seconds_since(t0);
  return {floor_fail == 0 && strict_fail == 0 && t < 600,
          fmt("floor failures %d, strict failures %d of %d nondegenerate, min excess*D^8/w^6 %.4g (%.0fs)",
              floor_fail, strict_fail, nondeg, min_cbar, t)};
}

Outcome equipartition_soundness() {
  const std::vector<std::pair<std::string, ConvexPolygon>> doms = {
      {"square", make_square()}, {"disk", make_disk()}, {"rect", make_rectangle(kPi, 0.2)}};
  double worst_mean = 0, worst_mass = 0, worst_id = 0;
  bool low = false;
  for (const auto& [name, P] : doms) {
    Solve2DOptions o;
    o.delta = width(P) / 40;
    const auto gs = quotient_fields(P, o);
    const auto w = gs.weight;
    auto p = [w](const Point& x) { return std::max(w(x), 0.0); };
    for (int n : {2, 4, 8, 16}) {
      for (auto kind : {PartitionKind::L2, PartitionKind::Measure}) {
        const auto part = equipartition(P, gs.fields, n, kind);
        worst_mean = std::max(worst_mean, part.mean_defect());
        worst_mass = std::max(worst_mass, part.mass_defect());
        low = low || part.low_confidence();
        if (kind == PartitionKind::L2)
          worst_id = std::max(worst_id, mean_value_bound(part, gs.fields, p, false).identity_defect);
      }
    }
  }
  return {worst_mean <= 1e-6 && worst_mass <= 1e-6 && worst_id <= 1e-6,
          fmt("worst mean defect %.1e, mass defect %.1e, identity defect %.1e%s", worst_mean, worst_mass, worst_id,
              low ? ", low-confidence cuts present" : "")};
}

Outcome log_concavity() {
  int violations = 0;
  std::string detail;
  for (const auto& [name, P] : std::vector<std::pair<std::string, ConvexPolygon>>{{"square", make_square()},
                                                                                  {"disk", make_disk()}}) {
    const auto r = log_concavity_check(P, 100, 7);
    violations += r.violations;
    detail += fmt("%s: %d/%d violations, worst margin %.3e; ", name.c_str(), r.violations, r.pairs, r.worst_margin);
  }
  return {violations == 0, detail};
}

Outcome localized() {
  int violations = 0;
  std::string detail;
  for (const auto& [name, P] : std::vector<std::pair<std::string, ConvexPolygon>>{
           {"square", make_square()}, {"disk", make_disk()}, {"hex", make_random_polygon(6, 3)}}) {
    const auto s = localized_sweep(P, 20, 13);
    violations += s.violations;
    detail += fmt("%s: %d violations, min excess %.3e; ", name.c_str(), s.violations, s.min_excess);
  }
  return {violations == 0, detail};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "1D sharp values", 0, sharp_values},
      {2, "class-A minimality", 120, class_A_minimality},
      {3, "truncation exponent", 0, truncation_exponent},
      {4, "rearrangement inequality", 0, rearrangement_inequality},
      {5, "stratified-potential bound", 0, stratified_bound},
      {6, "2D reference spectra", 0, reference_spectra},
      {7, "gap identity", 0, gap_identity},
      {8, "Neumann expansion", 0, neumann_expansion_rate},
      {9, "gap floor on random polygons", 600, gap_floor_random},
      {10, "equipartition soundness", 0, equipartition_soundness},
      {11, "log-concavity spot check", 0, log_concavity},
      {12, "localized inequality", 0, localized},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double t = seconds_since(t0);
    if (c.time_limit > 0 && t >= c.time_limit) {
      o.pass = false;
      o.detail += fmt(" [over time limit %.0fs]", c.time_limit);
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %-30s %7.1fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), t, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
