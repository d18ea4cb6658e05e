// paircorr: point-array generation, pair-correlation curves, local
// statistics, and empirical consistency checks, from one reproducible
// config. Exit codes: 0 success/consistent, 2 usage error, 3 inconsistent.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "paircorr/arrays.hpp"
#include "paircorr/io.hpp"
#include "paircorr/localstats.hpp"
#include "paircorr/paircorr.hpp"
#include "paircorr/scaling.hpp"

namespace {

using namespace paircorr;

struct Options {
  std::string config_path;
  std::string space = "interval";  // interval|square|torus|torus2|sphere
  std::string family = "grid";
  std::string alpha;  // symbolic tag or decimal literal
  int power = 2;      // poly family exponent
  bool skip_squares = false;
  std::int64_t n = 0;
  int row_count = 1;
  std::vector<std::int64_t> schedule;
  std::vector<double> tlist = {2.0, 3.0, 5.0};  // ball family radii
  double theta = 1.0;
  double c = 1.0;
  double m_explicit = 0.0;  // > 0 overrides c * N^theta
  double rmax = 5.0;
  int bins = 100;
  std::uint64_t seed = 12345;
  int threads = 1;
  std::string engine = "cells";
  std::string gate;  // sub|poisson; empty = family default
  std::string density;  // conformal frame density expression
  double window = 0.3;  // ball radius for variance runs
  std::int64_t n_mc = 100000;
  std::vector<double> theta_grid = {0.25, 0.5, 0.75, 1.0};
  std::string out_dir = ".";
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Space make_space(const Options& o) {
  if (o.space == "interval") return EuclideanDomain::unit_box(1);
  if (o.space == "square") return EuclideanDomain::unit_box(2);
  if (o.space == "torus") return FlatTorus::standard(1);
  if (o.space == "torus2") return FlatTorus::standard(2);
  if (o.space == "sphere") return UnitAreaSphere(2);
  throw UsageError("unknown --space '" + o.space +
                   "' (interval|square|torus|torus2|sphere)");
}

long double parse_alpha(const Options& o) {
  if (o.alpha.empty())
    throw UsageError("--alpha required for the " + o.family + " family");
  try {
    return alpha_constant(o.alpha);
  } catch (const std::invalid_argument&) {
    try {
      std::size_t used = 0;
      const long double v = std::stold(o.alpha, &used);
      if (used != o.alpha.size()) throw std::invalid_argument(o.alpha);
      return v;
    } catch (...) {
      throw UsageError("--alpha must be sqrt2|pi|golden or a decimal literal");
    }
  }
}

ArrayFamily make_family(const Options& o) {
  if (o.family == "grid") return ArrayFamily::grid();
  if (o.family == "kronecker") return ArrayFamily::kronecker(parse_alpha(o));
  if (o.family == "poly") return ArrayFamily::poly_frac(o.power, parse_alpha(o));
  if (o.family == "sqrt") return ArrayFamily::sqrt_frac(o.skip_squares);
  if (o.family == "prime") return ArrayFamily::prime_frac(parse_alpha(o));
  if (o.family == "random") return ArrayFamily::random_uniform(o.seed);
  if (o.family == "ball")
    return ArrayFamily::ball_rescaled_lattice(0.3, 0.2, o.tlist);
  throw UsageError("unknown --family '" + o.family + "'");
}

TriangularArray make_array(const Options& o) {
  auto family = make_family(o);
  if (family.kind() == ArrayFamily::Kind::ball_rescaled)
    return TriangularArray::from_ball_family(std::move(family));
  std::vector<std::int64_t> sizes = o.schedule;
  if (sizes.empty()) {
    if (o.n < 1 || o.row_count < 1)
      throw UsageError("--N (with optional --rows) or --schedule is required");
    std::int64_t v = o.n;
    for (int i = 0; i < o.row_count; ++i) {
      sizes.push_back(v);
      v *= 10;  // decade ladder N, 10N, 100N, ...
    }
  }
  return TriangularArray(make_space(o), RowSchedule(std::move(sizes)),
                         std::move(family));
}

FrameField make_frame(const Options& o, const Space& space) {
  const int d = space_dim(space);
  if (o.density.empty()) return FrameField::identity(d);
  const auto* dom = std::get_if<EuclideanDomain>(&space);
  if (!dom) throw UsageError("--density needs a Euclidean domain space");
  return normalize_frame(FrameField::conformal(d, o.density), *dom);
}

ScaleSequence make_scale(const Options& o, std::size_t rows) {
  if (o.m_explicit > 0.0)
    return ScaleSequence::explicit_list(
        std::vector<double>(rows, o.m_explicit), true);
  return ScaleSequence(o.c, o.theta, true);
}

void load_config(Options& o) {
  if (o.config_path.empty()) return;
  const json j = read_json(o.config_path);
  auto set = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  set("space", o.space);
  set("family", o.family);
  set("alpha", o.alpha);
  set("power", o.power);
  set("skip_squares", o.skip_squares);
  set("N", o.n);
  set("rows", o.row_count);
  set("schedule", o.schedule);
  set("tlist", o.tlist);
  set("theta", o.theta);
  set("c", o.c);
  set("M", o.m_explicit);
  set("rmax", o.rmax);
  set("bins", o.bins);
  set("seed", o.seed);
  set("threads", o.threads);
  set("engine", o.engine);
  set("gate", o.gate);
  set("density", o.density);
  set("window", o.window);
  set("n_mc", o.n_mc);
  set("theta_grid", o.theta_grid);
}

json resolved_config(const Options& o, const std::string& command) {
  return {{"command", command},
          {"space", o.space},
          {"family", o.family},
          {"alpha", o.alpha},
          {"power", o.power},
          {"skip_squares", o.skip_squares},
          {"N", o.n},
          {"rows", o.row_count},
          {"schedule", o.schedule},
          {"tlist", o.tlist},
          {"theta", o.theta},
          {"c", o.c},
          {"M", o.m_explicit},
          {"rmax", o.rmax},
          {"bins", o.bins},
          {"seed", o.seed},
          {"threads", o.threads},
          {"engine", o.engine},
          {"gate", o.gate},
          {"density", o.density},
          {"window", o.window},
          {"n_mc", o.n_mc},
          {"theta_grid", o.theta_grid}};
}

std::string out_path(const Options& o, const std::string& name) {
  std::filesystem::create_directories(o.out_dir);
  return (std::filesystem::path(o.out_dir) / name).string();
}

json provenance(const Options& o, const TriangularArray& arr, std::size_t row) {
  return {{"family", arr.family().name()},
          {"seed", o.seed},
          {"space", space_to_json(arr.space())},
          {"row", row},
          {"schedule", arr.schedule().sizes()}};
}

int cmd_gen(const Options& o) {
  auto arr = make_array(o);
  for (std::size_t i = 0; i < arr.schedule().rows(); ++i) {
    const PointSet pts = arr.row(i);
    const std::string base = "points_row" + std::to_string(i);
    write_points_csv(out_path(o, base + ".csv"), pts);
    json env = provenance(o, arr, i);
    env["N"] = static_cast<std::int64_t>(pts.size());
    env["file"] = base + ".csv";
    write_json(out_path(o, base + ".json"), env);
  }
  write_json(out_path(o, "run_config.json"), resolved_config(o, "gen"));
  return 0;
}

int cmd_pc(const Options& o) {
  auto arr = make_array(o);
  const auto scale = make_scale(o, arr.schedule().rows());
  const auto radii = default_radii(o.rmax, o.bins);
  const FrameField frame = make_frame(o, arr.space());
  for (std::size_t i = 0; i < arr.schedule().rows(); ++i) {
    const PointSet pts = arr.row(i);
    const double m = scale.at(i, arr.schedule().size(i));
    PairCorrelationCurve curve =
        o.engine == "brute"
            ? pc_brute_force(pts, arr.space(), frame, m, radii)
            : pc_curve(pts, arr.space(), frame, m, radii, o.threads);
    curve.meta.row_index = static_cast<std::int64_t>(i);
    const std::string base = "curve_row" + std::to_string(i);
    write_curve_csv(out_path(o, base + ".csv"), curve);
    write_curve_gnuplot(out_path(o, base + "_rho.dat"),
                        out_path(o, base + "_ref.dat"), curve);
    write_json(out_path(o, base + ".json"),
               curve_to_json(curve, provenance(o, arr, i)));
  }
  write_json(out_path(o, "run_config.json"), resolved_config(o, "pc"));
  return 0;
}

int cmd_variance(const Options& o) {
  auto arr = make_array(o);
  const auto scale = make_scale(o, arr.schedule().rows());
  json report = json::array();
  std::ofstream csv(out_path(o, "variance.csv"));
  csv << "row,N,M,lhs,lhs_stderr,rhs_exact,deviation_sigmas\n";
  for (std::size_t i = 0; i < arr.schedule().rows(); ++i) {
    const PointSet pts = arr.row(i);
    const double m = scale.at(i, arr.schedule().size(i));
    const auto* torus = std::get_if<FlatTorus>(&arr.space());
    if (!torus) throw UsageError("variance runs need a torus space");
    const auto rep = variance_identity_check_torus(pts, *torus, m, o.window,
                                        static_cast<std::size_t>(o.n_mc),
                                        o.seed + i);
    report.push_back({{"row", i},
                      {"N", static_cast<std::int64_t>(pts.size())},
                      {"M", m},
                      {"lhs", rep.lhs.value},
                      {"lhs_stderr", rep.lhs.stderr_},
                      {"rhs_exact", rep.rhs_exact},
                      {"vol_D", rep.vol_d},
                      {"deviation_sigmas", rep.deviation_sigmas},
                      {"seed", o.seed + i}});
    csv << i << ',' << pts.size() << ',' << format_g17(m) << ','
        << format_g17(rep.lhs.value) << ',' << format_g17(rep.lhs.stderr_)
        << ',' << format_g17(rep.rhs_exact) << ','
        << format_g17(rep.deviation_sigmas) << '\n';
    std::printf("row %zu  N=%zu  M=%.6g  LHS=%.6g+-%.3g  RHS=%.6g  (%.2f sigma)\n",
                i, pts.size(), m, rep.lhs.value, rep.lhs.stderr_, rep.rhs_exact,
                rep.deviation_sigmas);
  }
  write_json(out_path(o, "variance.json"), report);
  write_json(out_path(o, "run_config.json"), resolved_config(o, "variance"));
  return 0;
}

int cmd_equidist(const Options& o) {
  auto arr = make_array(o);
  const FrameField frame = make_frame(o, arr.space());
  json report = json::array();
  std::ofstream csv(out_path(o, "equidist.csv"));
  csv << "row,N,discrepancy\n";
  for (std::size_t i = 0; i < arr.schedule().rows(); ++i) {
    const PointSet pts = arr.row(i);
    const double disc = discrepancy(pts, arr.space(),
                                    frame.is_constant() ? nullptr : &frame);
    report.push_back({{"row", i},
                      {"N", static_cast<std::int64_t>(pts.size())},
                      {"discrepancy", disc}});
    csv << i << ',' << pts.size() << ',' << format_g17(disc) << '\n';
    std::printf("row %zu  N=%zu  discrepancy=%.6g\n", i, pts.size(), disc);
  }
  write_json(out_path(o, "equidist.json"), report);
  write_json(out_path(o, "run_config.json"), resolved_config(o, "equidist"));
  return 0;
}

int cmd_verify(const Options& o) {
  auto arr = make_array(o);
  VerifyOptions vo;
  vo.scale = make_scale(o, arr.schedule().rows());
  vo.radii = default_radii(o.rmax, o.bins);
  vo.threads = o.threads;
  // the Kronecker preset tests the full Poisson property (two-sided); all
  // other presets test the sub-Poisson hypothesis of the forward direction
  std::string gate = o.gate;
  if (gate.empty()) gate = o.family == "kronecker" ? "poisson" : "sub";
  if (gate != "sub" && gate != "poisson")
    throw UsageError("--gate must be sub or poisson");
  vo.two_sided = gate == "poisson";
  const FrameField frame = make_frame(o, arr.space());
  const auto res = verify_theorem_forward(arr, frame, vo);

  std::printf("%4s %10s %12s %12s %8s %12s %12s\n", "row", "N", "M",
              "sub_excess", "eps", "abs_excess", "discrepancy");
  json rows = json::array();
  for (const auto& r : res.rows) {
    std::printf("%4zu %10lld %12.5g %12.5g %8.3g %12.5g %12.5g\n", r.row,
                static_cast<long long>(r.n_points), r.m_scale,
                r.sub_poisson_excess, r.eps, r.poisson_excess, r.discrepancy);
    rows.push_back({{"row", r.row},
                    {"N", r.n_points},
                    {"M", r.m_scale},
                    {"sub_poisson_excess", r.sub_poisson_excess},
                    {"eps", r.eps},
                    {"poisson_excess", r.poisson_excess},
                    {"discrepancy", r.discrepancy}});
  }
  json rep = {{"gate", gate},
              {"rows", rows},
              {"consistent", res.consistent},
              {"note", "empirical consistency at finite N, not a proof"}};
  if (res.violation) {
    const auto& [n, r, e] = *res.violation;
    rep["violation"] = {{"N", n}, {"r", r}, {"excess", e}};
    std::printf("violation: N=%lld r=%.6g excess=%.6g\n",
                static_cast<long long>(n), r, e);
  }
  std::printf("verdict: %s\n",
              res.consistent ? "consistent (empirical)" : "inconsistent");
  write_json(out_path(o, "verify.json"), rep);
  write_json(out_path(o, "run_config.json"), resolved_config(o, "verify"));
  return res.consistent ? 0 : 3;
}

int cmd_find_scale(const Options& o) {
  for (double t : o.theta_grid)
    if (!(t > 0) || t > 1.0)
      throw UsageError("--theta-grid values must lie in (0,1]");
  auto arr = make_array(o);
  const FrameField frame = make_frame(o, arr.space());
  const auto res = find_poisson_scale(arr, frame, o.theta_grid, 0.05,
                                      default_radii(o.rmax, o.bins), o.threads);
  std::printf("%8s %12s %12s %6s\n", "theta", "M", "abs_excess", "pass");
  json table = json::array();
  for (const auto& r : res.table) {
    std::printf("%8.3g %12.5g %12.5g %6s\n", r.theta, r.m_scale,
                r.poisson_excess, r.pass ? "yes" : "no");
    table.push_back({{"theta", r.theta},
                     {"M", r.m_scale},
                     {"poisson_excess", r.poisson_excess},
                     {"pass", r.pass}});
  }
  json rep = {{"table", table}};
  if (res.best_theta) {
    rep["best_theta"] = *res.best_theta;
    std::printf("largest passing theta: %.4g\n", *res.best_theta);
  } else {
    std::printf("no theta in the grid passes\n");
  }
  write_json(out_path(o, "find_scale.json"), rep);
  write_json(out_path(o, "run_config.json"), resolved_config(o, "find-scale"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fine-scale pair statistics of deterministic point arrays"};
  app.require_subcommand(1);

  Options o;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config_path, "JSON config file");
    cmd->add_option("--space", o.space,
                    "interval|square|torus|torus2|sphere");
    cmd->add_option("--family", o.family,
                    "grid|kronecker|poly|sqrt|prime|random|ball");
    cmd->add_option("--alpha", o.alpha, "sqrt2|pi|golden or decimal");
    cmd->add_option("--power", o.power, "exponent for the poly family");
    cmd->add_flag("--skip-squares", o.skip_squares,
                  "drop perfect squares from the sqrt family");
    cmd->add_option("--N", o.n, "first row size");
    cmd->add_option("--rows", o.row_count, "row count (sizes N, 10N, ...)");
    cmd->add_option("--schedule", o.schedule, "explicit row sizes")
        ->delimiter(',');
    cmd->add_option("--tlist", o.tlist, "ball family radii")->delimiter(',');
    cmd->add_option("--theta", o.theta, "scale exponent M = c N^theta");
    cmd->add_option("--c", o.c, "scale prefactor");
    cmd->add_option("--M", o.m_explicit, "explicit M for every row");
    cmd->add_option("--rmax", o.rmax, "largest curve radius");
    cmd->add_option("--bins", o.bins, "curve bins");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--threads", o.threads, "worker cap");
    cmd->add_option("--engine", o.engine, "cells|brute")
        ->check(CLI::IsMember({"cells", "brute"}));
    cmd->add_option("--gate", o.gate, "verify gate: sub|poisson");
    cmd->add_option("--density", o.density, "conformal frame density");
    cmd->add_option("--window", o.window, "variance window ball radius");
    cmd->add_option("--nmc", o.n_mc, "Monte Carlo samples");
    cmd->add_option("--theta-grid", o.theta_grid, "find-scale grid")
        ->delimiter(',');
    cmd->add_option("--out", o.out_dir, "output directory");
  };

  auto* gen = app.add_subcommand("gen", "materialize array rows");
  auto* pc = app.add_subcommand("pc", "pair correlation curves");
  auto* variance = app.add_subcommand("variance", "torus variance identity");
  auto* equidist = app.add_subcommand("equidist", "discrepancy per row");
  auto* verify = app.add_subcommand("verify", "theorem consistency check");
  auto* find_scale = app.add_subcommand("find-scale", "largest Poisson theta");
  for (auto* cmd : {gen, pc, variance, equidist, verify, find_scale})
    add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    load_config(o);
    if (gen->parsed()) return cmd_gen(o);
    if (pc->parsed()) return cmd_pc(o);
    if (variance->parsed()) return cmd_variance(o);
    if (equidist->parsed()) return cmd_equidist(o);
    if (verify->parsed()) return cmd_verify(o);
    if (find_scale->parsed()) return cmd_find_scale(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
