#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gaplab/gap_lab.hpp"
#include "gaplab/oned_spectral.hpp"
#include "gaplab/partition.hpp"
#include "gaplab/planar_spectral.hpp"
#include "gaplab/rearrangement.hpp"

namespace gaplab::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSolverSeed = 12345;

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitCheckFailed = 2 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  std::string domain = "square";
  double delta = 0;  // 0: width / 60
  int n = 8;
  std::optional<std::uint64_t> seed;
  std::string out, csv, svg, pgm;
  double tol_factor = 3;

  std::string potential = "tan3";  // solve-1d: tan3, tan2, tan4 or a JSON file
  int n1d = 4096;
  std::string function;            // rearrange: JSON file; empty means random
  std::string kind;                // dirichlet|neumann or l2|measure
  int k = 0;                       // 0: 2 for dirichlet, 1 for neumann
  std::string weight = "u1sq";
  int chords = 20;
  std::vector<double> chord;       // x1 y1 x2 y2
  std::string family = "rects";
  double cells_across = 16;
  int jobs = 1;

  json to_json() const {
    json j;
    j["subcommand"] = subcommand;
    if (subcommand != "solve-1d" && subcommand != "rearrange" && subcommand != "sweep") {
      j["domain"] = domain;
      j["delta"] = delta;
    }
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["tol_factor"] = tol_factor;
    if (subcommand == "solve-1d") {
      j["potential"] = potential;
      j["n"] = n1d;
    } else if (subcommand == "rearrange") {
      j["function"] = function.empty() ? json("random") : json(function);
      j["n"] = n1d;
    } else if (subcommand == "solve-2d") {
      j["kind"] = kind;
      j["k"] = k;
    } else if (subcommand == "partition") {
      j["kind"] = kind;
      j["weight"] = weight;
      j["n"] = n;
    } else if (subcommand == "localized") {
      j["chords"] = chord.empty() ? json(chords) : json(chord);
    } else if (subcommand == "sweep") {
      j["family"] = family;
      j["kind"] = kind;
      j["cells_across"] = cells_across;
      j["jobs"] = jobs;
    }
    return j;
  }
};

// ---------------------------------------------------------------------------
// Formatting.

// Rounded to 12 significant digits so reports are byte-stable.
inline json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

inline json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline json points(const std::vector<Point>& v) {
  json a = json::array();
  for (const auto& p : v) a.push_back({num(p.x), num(p.y)});
  return a;
}

inline json to_json(const Check& c) {
  return {{"name", c.name}, {"value", num(c.value)}, {"compare", to_string(c.compare)}, {"bound", num(c.bound)},
          {"tol", num(c.tol)}, {"asserted", c.asserted}, {"pass", c.pass}};
}

inline json to_json(const GapReport& r) {
  json j;
  j["domain"] = r.domain;
  j["diameter"] = num(r.D);
  j["width"] = num(r.w);
  j["depth"] = num(r.eta);
  j["john_axes"] = {num(r.a1), num(r.a2)};
  j["delta"] = num(r.delta);
  j["nondegenerate"] = r.nondegenerate;
  if (r.has_dirichlet) {
    j["lambda1"] = num(r.lambda1);
    j["lambda1_error"] = num(r.lambda1_error);
    j["lambda2"] = num(r.lambda2);
    j["lambda2_error"] = num(r.lambda2_error);
    j["gap"] = num(r.gap);
    j["gap_error"] = num(r.gap_error);
    j["gap_floor"] = num(r.gap_floor);
    j["gap_excess"] = num(r.gap_excess);
    j["implied_cbar"] = num(r.implied_cbar);
  }
  if (r.has_neumann) {
    j["mu1"] = num(r.mu1);
    j["mu1_error"] = num(r.mu1_error);
    j["neumann_floor"] = num(r.neumann_floor);
    j["neumann_excess"] = num(r.neumann_excess);
    j["implied_neumann"] = num(r.implied_neumann);
  }
  return j;
}

inline json tolerances(double factor) {
  return {{"error_factor", factor},
          {"eps_geom", kEpsGeom},
          {"eps_part", kEpsPart},
          {"quotient_cutoff", kQuotientCutoff},
          {"min_cells_across_width", kMinCellsAcrossWidth},
          {"nondegenerate_aspect", kNondegenerateAspect},
          {"benchmark_1d", 1e-3},
          {"slope_target", 2.0},
          {"slope_tolerance", 0.1}};
}

// ---------------------------------------------------------------------------
// Plots.

class Svg {
 public:
  Svg(const ConvexPolygon& P, double size = 640) {
    P.bbox(xmin_, xmax_, ymin_, ymax_);
    s_ = size / std::max(xmax_ - xmin_, ymax_ - ymin_);
    w_ = (xmax_ - xmin_) * s_ + 2 * kPad;
    h_ = (ymax_ - ymin_) * s_ + 2 * kPad;
  }

  void polygon(const std::vector<Point>& v, const std::string& fill, const std::string& stroke, double width = 1) {
    body_ << "<polygon points=\"";
    for (const auto& p : v) body_ << X(p) << ',' << Y(p) << ' ';
    body_ << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\"/>\n";
  }

  void line(const Point& a, const Point& b, const std::string& stroke, double width = 1) {
    body_ << "<line x1=\"" << X(a) << "\" y1=\"" << Y(a) << "\" x2=\"" << X(b) << "\" y2=\"" << Y(b)
          << "\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\"/>\n";
  }

  void ellipse(const Ellipse& E, const std::string& stroke) {
    std::vector<Point> v;
    for (int k = 0; k < 128; ++k) v.push_back(E.boundary(2 * kPi * k / 128));
    polygon(v, "none", stroke, 1.5);
  }

  // Cells coloured by value: blue (negative), white (zero), red (positive).
  void heat(const GridFunction2D& f) {
    const Grid2D& g = *f.grid;
    const double top = std::max(f.max_abs(), 1e-300);
    for (int u = 0; u < g.size(); ++u) {
      const Point c = g.center(u);
      const double v = std::clamp(f.values[u] / top, -1.0, 1.0);
      const int lo = static_cast<int>(std::lround(255 * (1 - std::abs(v))));
      char col[16];
      if (v >= 0)
        std::snprintf(col, sizeof col, "#ff%02x%02x", lo, lo);
      else
        std::snprintf(col, sizeof col, "#%02x%02xff", lo, lo);
      body_ << "<rect x=\"" << X({c.x - g.hx / 2, 0}) << "\" y=\"" << Y({0, c.y + g.hy / 2}) << "\" width=\""
            << g.hx * s_ << "\" height=\"" << g.hy * s_ << "\" fill=\"" << col << "\"/>\n";
    }
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw UsageError("cannot write " + path.string());
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_ << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << body_.str() << "</svg>\n";
  }

 private:
  static constexpr double kPad = 10;
  double X(const Point& p) const { return kPad + (p.x - xmin_) * s_; }
  double Y(const Point& p) const { return kPad + (ymax_ - p.y) * s_; }

  double xmin_ = 0, xmax_ = 1, ymin_ = 0, ymax_ = 1, s_ = 1, w_ = 0, h_ = 0;
  std::ostringstream body_;
};

// Binary 8-bit PGM of |f| scaled to 1..255; 0 off the mask. First row is the top.
inline void write_pgm(const GridFunction2D& f, const std::string& path) {
  const Grid2D& g = *f.grid;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot write " + path);
  os << "P5\n" << g.nx << ' ' << g.ny << "\n255\n";
  const double top = std::max(f.max_abs(), 1e-300);
  for (int j = g.ny - 1; j >= 0; --j)
    for (int i = 0; i < g.nx; ++i) {
      const int u = g.unknown(i, j);
      const unsigned char c =
          u < 0 ? 0 : static_cast<unsigned char>(1 + std::lround(254 * std::abs(f.values[u]) / top));
      os.put(static_cast<char>(c));
    }
}

inline std::ofstream open_csv(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw UsageError("cannot write " + path);
  return os;
}

// ---------------------------------------------------------------------------
// Inputs.

inline json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot read " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

// Named generator or a JSON file {"vertices": [[x, y], ...]}.
inline ConvexPolygon load_domain(const std::string& spec) {
  if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json") {
    const json j = read_json(spec);
    if (!j.contains("vertices") || !j["vertices"].is_array()) throw UsageError(spec + ": missing \"vertices\" array");
    std::vector<Point> v;
    try {
      for (const auto& p : j["vertices"]) v.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    } catch (const json::exception& e) {
      throw UsageError(spec + ": " + e.what());
    }
    return ConvexPolygon::make(v);
  }
  try {
    return make_domain(spec);
  } catch (const InvalidInput& e) {
    throw UsageError(std::string(e.what()) + " (square, disk, diamond, rect:d:eps, ngon:k, sector:angle, random:k:seed, or a .json file)");
  }
}

inline std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("GAPLAB_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end) throw UsageError("GAPLAB_SEED must be a nonnegative integer");
  return v;
}

inline std::uint64_t require_seed(const RunConfig& c) {
  if (!c.seed) throw UsageError(c.subcommand + " draws random samples: pass --seed or set GAPLAB_SEED");
  return *c.seed;
}

inline Solve2DOptions solve_options(const RunConfig& c) {
  Solve2DOptions o;
  o.delta = c.delta;
  o.seed = c.seed.value_or(kDefaultSolverSeed);
  return o;
}

inline std::filesystem::path svg_dir(const RunConfig& c) {
  std::filesystem::path d(c.svg);
  std::error_code ec;
  std::filesystem::create_directories(d, ec);
  if (ec) throw UsageError("cannot create " + c.svg);
  return d;
}

// Checks computed with tol = 3 x error estimate are rescaled to the configured factor.
inline void apply_factor(std::vector<Check>& checks, double factor) {
  for (auto& c : checks) {
    c.tol *= factor / 3;
    c.evaluate();
  }
}

// ---------------------------------------------------------------------------
// Subcommands. Each fills `result` and `checks`.

struct Outcome {
  json result = json::object();
  std::vector<Check> checks;
};

inline MeasurePotential named_potential(const std::string& name, double& expected) {
  double c0 = 0, c2 = 2;
  if (name == "tan3") {
    c0 = 1;
    expected = 3;
  } else if (name == "tan2") {
    c0 = 0;
    expected = 2;
  } else if (name == "tan4") {
    c0 = 2;
    expected = 4;
  } else {
    throw UsageError("unknown potential '" + name + "'");
  }
  return MeasurePotential::smooth([c0, c2](double x) {
    const double t = std::tan(x);
    return c0 + c2 * t * t;
  });
}

inline MeasurePotential potential_from_json(const json& j) {
  try {
    const auto& g = j.at("grid");
    const Grid1D grid{{g.at("a").get<double>(), g.at("b").get<double>()}, g.at("n").get<int>()};
    auto density = j.at("density").get<std::vector<double>>();
    if (static_cast<int>(density.size()) != grid.n + 1)
      throw UsageError("density must have grid.n + 1 samples");
    std::vector<Atom> atoms;
    if (j.contains("atoms"))
      for (const auto& a : j["atoms"]) atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    std::optional<Interval> dom;
    if (j.contains("dom")) dom = Interval{j["dom"].at(0).get<double>(), j["dom"].at(1).get<double>()};
    return MeasurePotential::from_samples(grid, std::move(density), std::move(atoms), dom);
  } catch (const json::exception& e) {
    throw UsageError(std::string("potential: ") + e.what());
  }
}

inline Outcome run_solve_1d(const RunConfig& c) {
  Outcome o;
  double expected = std::numeric_limits<double>::quiet_NaN();
  const bool named = c.potential.find('.') == std::string::npos;
  const MeasurePotential q = named ? named_potential(c.potential, expected) : potential_from_json(read_json(c.potential));
  const auto r = dirichlet_eig1(q.interval, q, c.n1d);
  o.result = {{"lambda1", num(r.value)},          {"extrapolated", num(r.extrapolated_value)},
              {"error", num(r.error_estimate)},   {"tol", num(r.tol())},
              {"grid_n", r.grid_size},            {"steep_potential", r.steep_potential}};
  if (named) {
    o.result["expected"] = expected;
    o.checks.push_back(Check::make("benchmark", std::abs(r.extrapolated_value - expected), 0, 1e-3, Compare::AtMost));
  }
  if (!c.csv.empty()) {
    auto os = open_csv(c.csv);
    os << "x,eigenfunction\n";
    for (int i = 0; i <= r.eigenfunction.grid.n; ++i)
      os << fmt(r.eigenfunction.grid.x(i)) << ',' << fmt(r.eigenfunction.values[i]) << '\n';
  }
  return o;
}

inline Outcome run_rearrange(const RunConfig& c) {
  Outcome o;
  TestFunction v;
  if (c.function.empty()) {
    Rng rng(require_seed(c));
    v = random_test_function(rng, {-1.3, 1.3});
  } else {
    const json j = read_json(c.function);
    PiecewiseLinear p;
    try {
      p.x = j.at("x").get<std::vector<double>>();
      p.y = j.at("y").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw UsageError(std::string("function: ") + e.what());
    }
    if (p.x.size() != p.y.size()) throw UsageError("function: x and y differ in length");
    v = TestFunction::make(std::move(p));
  }
  const auto d = stratified(v);
  json nodes = json::array();
  for (const auto& n : d.nodes)
    nodes.push_back({{"index", multi_index_string(n.index)},
                     {"interval", {num(n.interval.a), num(n.interval.b)}},
                     {"parent", n.parent},
                     {"children", {n.child[0], n.child[1]}},
                     {"level", num(n.level)},
                     {"split", n.branching() ? nums({n.split[0], n.split[1], n.split[2]}) : json(nullptr)}});
  const auto V = d.potential_samples(512);
  std::vector<double> vx;
  for (int i = 0; i <= V.grid.n; ++i) vx.push_back(V.grid.x(i));
  const auto eta = eta1_stratified(d, c.n1d);
  o.result["tree"] = nodes;
  o.result["gamma"] = d.gamma;
  o.result["function"] = {{"x", nums(v.f.x)}, {"y", nums(v.f.y)}};
  o.result["rearranged"] = {{"x", nums(d.rearranged.x)}, {"y", nums(d.rearranged.y)}};
  o.result["potential"] = {{"x", nums(vx)}, {"y", nums(V.values)}};
  o.result["eta1"] = {{"value", num(eta.value)},
                      {"extrapolated", num(eta.extrapolated_value)},
                      {"error", num(eta.error_estimate)},
                      {"tol", num(eta.tol())}};
  o.checks.push_back(Check::make("eta1_floor", eta.extrapolated_value, 4, eta.tol()));
  if (!c.csv.empty()) {
    auto os = open_csv(c.csv);
    os << "x,rearranged\n";
    for (std::size_t i = 0; i < d.rearranged.x.size(); ++i)
      os << fmt(d.rearranged.x[i]) << ',' << fmt(d.rearranged.y[i]) << '\n';
  }
  return o;
}

inline json grid_json(const Grid2D& g) {
  return {{"nx", g.nx}, {"ny", g.ny}, {"hx", num(g.hx)}, {"hy", num(g.hy)}, {"unknowns", g.size()},
          {"lost_area", num(g.lost_area)}};
}

inline json domain_json(const ConvexPolygon& P) {
  return {{"vertices", points(P.vertices())}, {"area", num(P.area())}, {"diameter", num(diameter(P).length)},
          {"width", num(width(P))}};
}

inline Outcome run_solve_2d(const RunConfig& c, const ConvexPolygon& P) {
  Outcome o;
  const auto opt = solve_options(c);
  std::vector<EigenPair2D> pairs;
  if (c.kind == "dirichlet") {
    pairs = dirichlet_eigs(P, c.k == 0 ? 2 : c.k, opt);
  } else {
    if (c.k > 1) throw UsageError("neumann solves compute mu_1 only (k = 1)");
    pairs.push_back(neumann_eig1(P, opt));
  }
  json ev = json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& e = pairs[i];
    ev.push_back({{"index", i + 1}, {"value", num(e.value)}, {"coarse_value", num(e.coarse_value)},
                  {"error", num(e.error_estimate)}, {"extrapolated", num(e.extrapolated())}, {"tol", num(e.tol())}});
  }
  o.result["kind"] = c.kind;
  o.result["domain"] = domain_json(P);
  o.result["grid"] = grid_json(*pairs[0].function.grid);
  o.result["eigenvalues"] = ev;
  if (!c.pgm.empty()) write_pgm(pairs.back().function, c.pgm);
  if (!c.svg.empty()) {
    const auto dir = svg_dir(c);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      Svg s(P);
      s.heat(pairs[i].function);
      s.polygon(P.vertices(), "none", "black", 1.5);
      s.save(dir / ("eigenfunction_" + std::to_string(i + 1) + ".svg"));
    }
  }
  if (!c.csv.empty()) {
    auto os = open_csv(c.csv);
    os << "index,value,coarse_value,error,extrapolated\n";
    for (std::size_t i = 0; i < pairs.size(); ++i)
      os << i + 1 << ',' << fmt(pairs[i].value) << ',' << fmt(pairs[i].coarse_value) << ','
         << fmt(pairs[i].error_estimate) << ',' << fmt(pairs[i].extrapolated()) << '\n';
  }
  return o;
}

inline Outcome run_partition(const RunConfig& c, const ConvexPolygon& P) {
  Outcome o;
  const auto opt = solve_options(c);
  const PartitionKind kind = c.kind == "measure" ? PartitionKind::Measure : PartitionKind::L2;
  PixelFields fields;
  std::function<double(const Point&)> pfun;
  GridFunction2D shown;
  if (c.weight == "u1sq") {
    auto gs = quotient_fields(P, opt);
    fields = gs.fields;
    auto w = gs.weight;
    pfun = [w](const Point& x) { return std::max(w(x), 0.0); };
    shown = {fields.grid, fields.u};
  } else {
    const auto e = neumann_eig1(P, opt);
    fields = PixelFields::make(e.function, Eigen::VectorXd::Ones(e.function.grid->size()));
    pfun = [](const Point&) { return 1.0; };
    shown = e.function;
  }
  const auto part = equipartition(P, fields, c.n, kind);
  json cells = json::array();
  std::vector<CellDiagnostics> diag;
  for (const auto& r : part.cells) {
    diag.push_back(cell_diagnostics(r.cell, pfun));
    const auto& d = diag.back();
    cells.push_back({{"vertices", points(r.cell.vertices())},
                     {"depth", r.depth},
                     {"area", num(r.area)},
                     {"int_up", num(r.up)},
                     {"int_abs_up", num(r.abs_up)},
                     {"int_u2p", num(r.u2p)},
                     {"int_grad2p", num(r.g2p)},
                     {"low_confidence", r.low_confidence},
                     {"diameter", num(d.diameter)},
                     {"mu1", num(d.mu1)},
                     {"mu1_error", num(d.mu1_error)},
                     {"h_min", num(d.h_min)},
                     {"h_max", num(d.h_max)},
                     {"affinity_residual", num(d.affinity_residual)}});
  }
  json cuts = json::array();
  for (const auto& k : part.cuts)
    cuts.push_back({{"angle", num(k.angle)}, {"offset", num(k.offset)}, {"depth", k.depth},
                    {"low_confidence", k.low_confidence}});
  o.result["domain"] = domain_json(P);
  o.result["kind"] = to_string(kind);
  o.result["weight"] = c.weight;
  o.result["cells"] = cells;
  o.result["cuts"] = cuts;
  o.result["mean_defect"] = num(part.mean_defect());
  o.result["mass_defect"] = num(part.mass_defect());
  o.result["low_confidence"] = part.low_confidence();
  o.result["max_cut_normal_extent"] = num(max_cut_normal_extent(part));
  o.checks.push_back(Check::make("cell_mean", part.mean_defect(), kEpsPart, 0, Compare::AtMost));
  o.checks.push_back(Check::make("cell_mass", part.mass_defect(), kEpsPart, 0, Compare::AtMost));
  if (kind == PartitionKind::L2) {
    const auto mv = mean_value_bound(part, fields, pfun, false);
    o.result["identity_defect"] = num(mv.identity_defect);
    o.result["global_rayleigh"] = num(mv.global_rayleigh);
    o.checks.push_back(Check::make("decomposition_identity", mv.identity_defect, kEpsPart, 0, Compare::AtMost));
  }
  if (!c.csv.empty()) {
    auto os = open_csv(c.csv);
    os << "cell,depth,area,int_up,int_u2p,diameter,mu1,mu1_error,h_min,h_max,affinity_residual\n";
    for (std::size_t i = 0; i < part.cells.size(); ++i) {
      const auto& r = part.cells[i];
      const auto& d = diag[i];
      os << i << ',' << r.depth << ',' << fmt(r.area) << ',' << fmt(r.up) << ',' << fmt(r.u2p) << ','
         << fmt(d.diameter) << ',' << fmt(d.mu1) << ',' << fmt(d.mu1_error) << ',' << fmt(d.h_min) << ','
         << fmt(d.h_max) << ',' << fmt(d.affinity_residual) << '\n';
    }
  }
  if (!c.svg.empty()) {
    Svg s(P);
    s.heat(shown);
    for (const auto& r : part.cells) s.polygon(r.cell.vertices(), "none", "black", 1);
    s.polygon(P.vertices(), "none", "black", 2);
    s.save(svg_dir(c) / "partition.svg");
  }
  return o;
}

inline void gap_overlay(const RunConfig& c, const ConvexPolygon& P, const GridFunction2D& f, const std::string& name) {
  Svg s(P);
  s.heat(f);
  s.polygon(P.vertices(), "none", "black", 1.5);
  const Chord d = diameter(P);
  s.line(d.p, d.q, "green", 1.5);
  s.ellipse(john_ellipse(P), "purple");
  s.save(svg_dir(c) / name);
}

inline Outcome run_gap_check(const RunConfig& c, const ConvexPolygon& P) {
  Outcome o;
  const auto r = verify_gap(P, solve_options(c), c.domain);
  o.result = to_json(r);
  o.checks = r.checks;
  if (!c.svg.empty()) gap_overlay(c, P, dirichlet_eigs(P, 2, solve_options(c))[1].function, "gap.svg");
  if (!c.csv.empty()) {
    auto os = open_csv(c.csv);
    os << "domain,diameter,width,lambda1,lambda2,gap,gap_error,gap_floor,gap_excess,implied_cbar\n";
    os << r.domain << ',' << fmt(r.D) << ',' << fmt(r.w) << ',' << fmt(r.lambda1) << ',' << fmt(r.lambda2) << ','
       << fmt(r.gap) << ',' << fmt(r.gap_error) << ',' << fmt(r.gap_floor) << ',' << fmt(r.gap_excess) << ','
       << fmt(r.implied_cbar) << '\n';
  }
  return o;
}

inline Outcome run_neumann_check(const RunConfig& c, const ConvexPolygon& P) {
  Outcome o;
  const auto r = verify_neumann(P, solve_options(c), c.domain);
  o.result = to_json(r);
  o.checks = r.checks;
  if (!c.svg.empty()) gap_overlay(c, P, neumann_eig1(P, solve_options(c)).function, "neumann.svg");
  if (!c.csv.empty()) {
    auto os = open_csv(c.csv);
    os << "domain,diameter,width,a1,a2,mu1,mu1_error,neumann_floor,neumann_excess,implied_neumann\n";
    os << r.domain << ',' << fmt(r.D) << ',' << fmt(r.w) << ',' << fmt(r.a1) << ',' << fmt(r.a2) << ','
       << fmt(r.mu1) << ',' << fmt(r.mu1_error) << ',' << fmt(r.neumann_floor) << ',' << fmt(r.neumann_excess) << ','
       << fmt(r.implied_neumann) << '\n';
  }
  return o;
}

inline Outcome run_localized(const RunConfig& c, const ConvexPolygon& P) {
  Outcome o;
  const auto ctx = LocalizedContext::make(P, solve_options(c));
  std::vector<Chord> chords;
  if (!c.chord.empty()) {
    if (c.chord.size() != 4) throw UsageError("--chord takes x1 y1 x2 y2");
    const Point a{c.chord[0], c.chord[1]}, b{c.chord[2], c.chord[3]};
    chords.push_back({a, b, dist(a, b)});
  } else {
    Rng rng(require_seed(c));
    for (int i = 0; i < c.chords; ++i) chords.push_back(random_chord(P, rng));
  }
  json rows = json::array();
  std::vector<LocalizedReport> reps;
  double min_c = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < chords.size(); ++i) {
    const auto r = verify_localized(ctx, chords[i], [](double) { return 1.0; });
    reps.push_back(r);
    if (std::isfinite(r.implied_C)) min_c = std::min(min_c, r.implied_C);
    rows.push_back({{"p", {num(r.chord.p.x), num(r.chord.p.y)}},
                    {"q", {num(r.chord.q.x), num(r.chord.q.y)}},
                    {"length", num(r.chord.length)},
                    {"mu", num(r.mu)},
                    {"tol", num(r.tol)},
                    {"bound", num(r.bound)},
                    {"excess", num(r.excess)},
                    {"implied_C", num(r.implied_C)}});
    // tol = 1D tolerance + 3 x weight change; only the second part follows the factor.
    o.checks.push_back(
        Check::make("chord_" + std::to_string(i), r.mu, r.bound, r.mu_error + c.tol_factor * r.weight_change));
  }
  o.result["diameter"] = num(ctx.D);
  o.result["chords"] = rows;
  o.result["min_implied_C"] = num(min_c);
  if (!c.csv.empty()) {
    auto os = open_csv(c.csv);
    os << "chord,px,py,qx,qy,length,mu,tol,bound,excess,implied_C\n";
    for (std::size_t i = 0; i < reps.size(); ++i) {
      const auto& r = reps[i];
      os << i << ',' << fmt(r.chord.p.x) << ',' << fmt(r.chord.p.y) << ',' << fmt(r.chord.q.x) << ','
         << fmt(r.chord.q.y) << ',' << fmt(r.chord.length) << ',' << fmt(r.mu) << ',' << fmt(r.tol) << ','
         << fmt(r.bound) << ',' << fmt(r.excess) << ',' << fmt(r.implied_C) << '\n';
    }
  }
  if (!c.svg.empty()) {
    Svg s(P);
    s.heat(ctx.fine);
    s.polygon(P.vertices(), "none", "black", 1.5);
    for (const auto& r : reps) s.line(r.chord.p, r.chord.q, r.pass ? "green" : "red", 1);
    s.save(svg_dir(c) / "localized.svg");
  }
  return o;
}

inline Outcome run_sweep(const RunConfig& c) {
  Outcome o;
  const SweepKind kind = c.kind == "neumann" ? SweepKind::Neumann : SweepKind::Dirichlet;
  const std::uint64_t seed = c.family == "random" ? require_seed(c) : c.seed.value_or(1);
  Family fam;
  try {
    fam = make_family(c.family, seed);
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  const auto f = exponent_sweep(fam, kind, {c.cells_across, c.jobs});
  json members = json::array();
  for (std::size_t i = 0; i < f.members.size(); ++i) {
    json m = to_json(f.members[i]);
    m["param"] = num(f.params[i]);
    members.push_back(m);
    for (auto ch : f.members[i].checks) {
      ch.name = f.members[i].domain + "/" + ch.name;
      o.checks.push_back(ch);
    }
  }
  o.result["family"] = f.family;
  o.result["kind"] = to_string(kind);
  o.result["members"] = members;
  o.result["slope"] = num(f.slope);
  o.result["intercept"] = num(f.intercept);
  o.result["fitted_points"] = f.fitted_points;
  o.result["min_implied_constant"] = num(f.min_implied);
  o.result["slope_asserted"] = f.slope_asserted;
  apply_factor(o.checks, c.tol_factor);
  if (f.slope_asserted) {
    o.checks.push_back(Check::make("slope", std::isfinite(f.slope) ? std::abs(f.slope - f.slope_target) : 1e300, 0,
                                   f.slope_tolerance, Compare::AtMost));
  }
  if (!c.csv.empty()) {
    auto os = open_csv(c.csv);
    os << "param,width,diameter,excess,error,implied\n";
    for (std::size_t i = 0; i < f.members.size(); ++i) {
      const auto& m = f.members[i];
      const bool d = kind == SweepKind::Dirichlet;
      os << fmt(f.params[i]) << ',' << fmt(m.w) << ',' << fmt(m.D) << ',' << fmt(d ? m.gap_excess : m.neumann_excess)
         << ',' << fmt(d ? m.gap_error : m.mu1_error) << ',' << fmt(d ? m.implied_cbar : m.implied_neumann) << '\n';
    }
  }
  return o;
}

// ---------------------------------------------------------------------------

inline int execute(RunConfig c, std::ostream& out, std::ostream& err) {
  try {
    if (!c.seed) c.seed = env_seed();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  json report;
  report["version"] = kVersion;
  report["config"] = c.to_json();
  report["tolerances"] = tolerances(c.tol_factor);
  int code = kExitOk;
  try {
    if (!(c.tol_factor > 0)) throw UsageError("--tol-factor must be positive");
    Outcome o;
    const std::string& s = c.subcommand;
    if (s == "solve-1d") {
      o = run_solve_1d(c);
    } else if (s == "rearrange") {
      o = run_rearrange(c);
    } else if (s == "sweep") {
      o = run_sweep(c);
    } else {
      const ConvexPolygon P = load_domain(c.domain);
      if (s == "solve-2d") o = run_solve_2d(c, P);
      else if (s == "partition") o = run_partition(c, P);
      else if (s == "gap-check") { o = run_gap_check(c, P); apply_factor(o.checks, c.tol_factor); }
      else if (s == "neumann-check") { o = run_neumann_check(c, P); apply_factor(o.checks, c.tol_factor); }
      else if (s == "localized") o = run_localized(c, P);
      else throw UsageError("unknown subcommand " + s);
    }
    json checks = json::array();
    bool pass = true;
    for (const auto& k : o.checks) {
      checks.push_back(to_json(k));
      if (k.asserted && !k.pass) pass = false;
    }
    report["result"] = o.result;
    report["checks"] = checks;
    report["pass"] = pass;
    if (!pass) code = kExitCheckFailed;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    report["error"] = {{"code", to_string(e.code())}, {"message", e.what()}};
    report["pass"] = false;
    err << "error: " << e.what() << '\n';
    code = kExitUsage;
  }
  const std::string text = report.dump(2) + "\n";
  if (c.out.empty()) {
    out << text;
  } else {
    std::ofstream os(c.out);
    if (!os || !(os << text)) {
      err << "error: cannot write " << c.out << '\n';
      return kExitUsage;
    }
    out << c.subcommand << ": " << (code == kExitOk ? "pass" : code == kExitCheckFailed ? "FAIL" : "error")
        << ", report written to " << c.out << '\n';
  }
  return code;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig c;
  CLI::App app{"Spectral gap and Neumann eigenvalue verification for convex polygons", "gaplab"};
  app.require_subcommand(1);

  auto common = [&c](CLI::App* s, bool domain) {
    if (domain) {
      s->add_option("--domain", c.domain, "square, disk, diamond, rect:d:eps, ngon:k, sector:angle, random:k:seed, or a .json file");
      s->add_option("--delta", c.delta, "grid spacing (default: width / 60)")->check(CLI::NonNegativeNumber);
    }
    s->add_option("--seed", c.seed, "random seed (fallback: GAPLAB_SEED)");
    s->add_option("--out", c.out, "JSON report path (default: stdout)");
    s->add_option("--csv", c.csv, "CSV output path");
    s->add_option("--tol-factor", c.tol_factor, "multiple of the error estimate used as tolerance")->capture_default_str();
  };

  auto* s1 = app.add_subcommand("solve-1d", "first Dirichlet eigenvalue of -v'' + q v on an interval");
  common(s1, false);
  s1->add_option("--potential", c.potential, "tan3 | tan2 | tan4 | potential JSON file")->capture_default_str();
  s1->add_option("--n", c.n1d, "grid intervals")->capture_default_str()->check(CLI::Range(64, 1 << 22));

  auto* re = app.add_subcommand("rearrange", "stratified rearrangement of a test function");
  common(re, false);
  re->add_option("--function", c.function, "function JSON file {\"x\": [...], \"y\": [...]} (default: random)");
  re->add_option("--n", c.n1d, "grid intervals for eta_1")->capture_default_str()->check(CLI::Range(64, 1 << 20));

  auto* s2 = app.add_subcommand("solve-2d", "Dirichlet or Neumann eigenpairs on a polygon");
  common(s2, true);
  c.kind = "";
  s2->add_option("--kind", c.kind, "dirichlet | neumann")->check(CLI::IsMember({"dirichlet", "neumann"}));
  s2->add_option("--k", c.k, "number of Dirichlet eigenpairs (1-3)")->check(CLI::Range(1, 3));
  s2->add_option("--pgm", c.pgm, "PGM heatmap of the last eigenfunction");
  s2->add_option("--svg", c.svg, "directory for SVG plots");

  auto* pa = app.add_subcommand("partition", "convex equipartition of the ground-state quotient");
  common(pa, true);
  pa->add_option("--weight", c.weight, "u1sq | one")->check(CLI::IsMember({"u1sq", "one"}))->capture_default_str();
  pa->add_option("--kind", c.kind, "l2 | measure")->check(CLI::IsMember({"l2", "measure"}));
  pa->add_option("--n", c.n, "number of cells (power of two)")->capture_default_str();
  pa->add_option("--svg", c.svg, "directory for SVG plots");

  auto* gc = app.add_subcommand("gap-check", "Dirichlet gap against 3 pi^2 / D^2");
  common(gc, true);
  gc->add_option("--svg", c.svg, "directory for SVG plots");

  auto* nc = app.add_subcommand("neumann-check", "Neumann mu_1 against pi^2 / D^2");
  common(nc, true);
  nc->add_option("--svg", c.svg, "directory for SVG plots");

  auto* lo = app.add_subcommand("localized", "weighted Neumann eigenvalue along chords with weight u_1^2");
  common(lo, true);
  lo->add_option("--chords", c.chords, "number of random chords")->capture_default_str()->check(CLI::Range(1, 100000));
  lo->add_option("--chord", c.chord, "explicit chord x1 y1 x2 y2")->expected(4);
  lo->add_option("--svg", c.svg, "directory for SVG plots");

  auto* sw = app.add_subcommand("sweep", "excess against width across a domain family");
  common(sw, false);
  sw->add_option("--family", c.family, "rects | sectors | ngons | random")->capture_default_str();
  sw->add_option("--kind", c.kind, "dirichlet | neumann")->check(CLI::IsMember({"dirichlet", "neumann"}));
  sw->add_option("--cells-across", c.cells_across, "grid cells across the width")->capture_default_str()
      ->check(CLI::Range(8.0, 1000.0));
  sw->add_option("--jobs", c.jobs, "worker threads")->capture_default_str()->check(CLI::Range(1, 256));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  for (auto* s : app.get_subcommands()) c.subcommand = s->get_name();
  if (c.kind.empty()) c.kind = c.subcommand == "partition" ? "l2" : "dirichlet";
  return execute(c, out, err);
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"gaplab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace gaplab::cli
