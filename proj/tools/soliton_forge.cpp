// soliton-forge: batch driver for the solver library. Subcommands write
// deterministic artifacts plus a manifest.json listing every file with a
// 64-bit FNV-1a content hash.
//
// Exit codes: 0 success / all checks pass, 1 numerical failure, 2 bad usage.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <solitonforge/asymptotics.hpp>
#include <solitonforge/convexity.hpp>
#include <solitonforge/curve_flow.hpp>
#include <solitonforge/elliptic.hpp>
#include <solitonforge/legendre.hpp>
#include <solitonforge/level_set.hpp>
#include <solitonforge/min_ellipsoid.hpp>
#include <solitonforge/reference.hpp>
#include <solitonforge/shooting.hpp>

namespace fs = std::filesystem;
using namespace soliton;

namespace {

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << text;
}

// manifest.json written last; lists every other file in the directory
void write_manifest(const fs::path& dir) {
  nlohmann::json files = nlohmann::json::array();
  std::vector<fs::path> paths;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
      paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    std::ostringstream hash;
    hash << std::hex << fnv1a(ss.str());
    files.push_back({{"path", fs::relative(p, dir).generic_string()},
                     {"fnv1a64", hash.str()}});
  }
  nlohmann::json j;
  j["files"] = files;
  write_text(dir / "manifest.json", j.dump(2) + "\n");
}

std::vector<double> parse_schedule(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw CLI::ValidationError("schedule", "empty schedule");
  return out;
}

struct SolveArgs {
  int n = 2;
  double r = 1.0, t = 1.0, sigma = 1.0;
  int resolution = 129;
  bool continuation = false;
  bool log_transform = false;
  std::string out;
};

int cmd_solve(const SolveArgs& a) {
  fs::create_directories(a.out);
  EllipsoidDomain dom{a.n, a.r, a.t};
  SolverConfig cfg;
  cfg.sigma = a.sigma;

  DirichletResult result;
  if (a.log_transform) {
    cfg.tolerance = 1e-3;  // the psi boundary layer caps the usable tolerance
    result = solve_log_transformed(dom, cfg, a.resolution);
    GridFunction u = recover_from_log(result.u);
    u.save(a.out + "/solution_from_log.grid");
  } else if (a.continuation) {
    std::vector<double> ladder{1.0, 0.1, 0.01, 1e-3, 1e-6};
    while (!ladder.empty() && ladder.front() < a.sigma) ladder.erase(ladder.begin());
    if (ladder.empty() || ladder.back() > a.sigma) ladder.push_back(a.sigma);
    auto chain = sigma_continuation(dom, ladder, cfg, a.resolution);
    result = std::move(chain.back());
  } else {
    result = solve_dirichlet(dom, cfg, 0.0, a.resolution);
  }

  result.u.save(a.out + "/solution.grid");
  write_text(a.out + "/stats.json", result.stats.to_json() + "\n");
  write_manifest(a.out);
  if (!result.stats.converged) {
    std::cerr << "solve: not converged, residual " << result.stats.final_residual
              << "\n";
    return 1;
  }
  return 0;
}

struct ConstructArgs {
  int n = 2;
  double K = 2.0, theta = 2.0;
  std::string mode = "primal";
  int resolution = 97;
  std::string k_list;  // optional family
  std::string out;
};

int cmd_construct(const ConstructArgs& a) {
  fs::create_directories(a.out);
  ShootingTolerances tol;
  tol.resolution = a.resolution;

  try {
    if (!a.k_list.empty()) {
      auto ks = parse_schedule(a.k_list);
      ShootingMode mode = a.mode == "dual" ? ShootingMode::DualSigmaOne
                                           : ShootingMode::PrimalSigmaZero;
      SolitonFamily fam = build_family(a.n, a.theta, ks, mode, tol);
      std::vector<std::string> paths;
      for (std::size_t i = 0; i < fam.entries.size(); ++i) {
        std::ostringstream name;
        name << "w_" << fam.entries[i].k << ".grid";
        if (fam.entries[i].converged) {
          fam.entries[i].w.save(a.out + "/" + name.str());
          paths.push_back(name.str());
        } else {
          paths.push_back("");
        }
      }
      write_text(a.out + "/family.json", fam.to_json(paths) + "\n");
      write_manifest(a.out);
      return fam.complete ? 0 : 1;
    }

    if (a.mode == "product") {
      GridFunction w = product_construction(a.n, a.theta, a.K, tol);
      w.save(a.out + "/reduced.grid");
      write_manifest(a.out);
      return 0;
    }

    ShootingMode mode = a.mode == "dual" ? ShootingMode::DualSigmaOne
                                         : ShootingMode::PrimalSigmaZero;
    ShootingResult res = shoot_parameters(a.n, a.K, a.theta, mode, tol);
    res.solution.save(a.out + "/solution.grid");
    write_text(a.out + "/shooting.json", res.to_json("solution.grid") + "\n");
    write_manifest(a.out);
    return res.converged ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "construct: " << e.what() << "\n";
    write_manifest(a.out);  // partial results always flushed
    return 1;
  }
}

struct CsfArgs {
  double a = 2.0, b = 1.0;
  int N = 256;
  double t_end = 0.6, dt0 = 1e-3;
  int outputs = 50;
  std::string out;
};

int cmd_csf(const CsfArgs& a) {
  fs::create_directories(a.out);
  SupportCurve w0 = make_ellipse(a.a, a.b, a.N);
  FlowTrajectory traj = csf_run(w0, a.t_end, a.dt0, a.outputs);
  traj.export_csv(a.out + "/flow");

  nlohmann::json j;
  AreaLawReport area = area_law_check(traj);
  j["area_law"] = {{"slope", area.slope},
                   {"deviation", area.deviation},
                   {"pass", area.pass}};
  RoundnessReport round = normalize_and_roundness(traj);
  j["extinction_time"] = round.extinction_time;
  j["roundness"] = round.delta;
  DecayReport decay = gage_hamilton_decay(traj);
  j["decay"] = {{"applicable", decay.applicable},
                {"rate", decay.rate},
                {"pass", decay.pass}};
  write_text(a.out + "/reports.json", j.dump(2) + "\n");
  write_manifest(a.out);
  return (!traj.aborted && area.pass && decay.pass) ? 0 : 1;
}

struct BlowdownArgs {
  std::string input;  // GridFunction file, or "bowl2"/"eta2"/"eta3"
  std::string schedule = "100,1000,10000";
  int resolution = 65;
  std::string out;
};

int cmd_blowdown(const BlowdownArgs& a) {
  fs::create_directories(a.out);
  FieldFn field;
  int dim = 2;
  if (a.input == "bowl2") {
    auto prof = std::make_shared<BowlProfile>(bowl_profile(2, 400.0, 0.01));
    field = [prof](const Vec& x) { return prof->value(norm(x, 2)); };
  } else if (a.input == "eta2" || a.input == "eta3") {
    int k = a.input == "eta2" ? 2 : 3;
    dim = 3;
    field = [k](const Vec& x) { return eta_profile(x, k); };
  } else {
    GridFunction u = GridFunction::load(a.input);
    dim = u.grid.dim;
    field = field_of(u);
  }

  auto schedule = parse_schedule(a.schedule);
  BlowdownReport rep = classify_profile(field, dim, schedule, a.resolution);
  write_text(a.out + "/blowdown.json", rep.to_json() + "\n");
  BlowdownField last = blowdown(field, dim, schedule.back(), a.resolution);
  last.u.save(a.out + "/blowdown_final.grid");
  write_manifest(a.out);
  return rep.indeterminate ? 1 : 0;
}

// fast verifier over reference fields: no large solves, a dozen reports
int cmd_verify(const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<EstimateReport> reports;
  nlohmann::json extras = nlohmann::json::object();

  {  // translator equation residual of the grim reaper, 200 analytic samples
    EstimateReport rep;
    rep.name = "grim-reaper-residual";
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
      double x = -1.5 + 3.0 * i / 199.0;
      double resid = grim_reaper_d2(x) / (1.0 + grim_reaper_d1(x) * grim_reaper_d1(x)) - 1.0;
      worst = std::max(worst, std::abs(resid));
    }
    rep.samples.push_back({0.0, worst, 1e-12});
    rep.margin = 1e-12 - worst;
    rep.pass = rep.margin >= 0;
    reports.push_back(rep);
  }

  auto quadratic_disk = [](int res) {
    CartesianGrid g;
    g.dim = 2;
    g.spacing = 2.0 / (res - 1);
    g.origin = vec2(-1, -1);
    g.counts = {res, res, 1};
    GridFunction u(g);
    for (int j = 0; j < res; ++j)
      for (int i = 0; i < res; ++i) {
        Vec x = g.node(i, j);
        u.at(i, j) = 0.5 * (x[0] * x[0] + x[1] * x[1]);
        u.mask[g.index(i, j)] = x[0] * x[0] + x[1] * x[1] < 1.0 ? 1 : 0;
      }
    return u;
  };

  {  // Legendre involution on |x|^2/2
    GridFunction u = quadratic_disk(65);
    DualField d = legendre_transform(u, 65);
    DualField back = legendre_transform(d.dual, u.grid);
    double err = 0;
    for (int j = 0; j < 65; ++j)
      for (int i = 0; i < 65; ++i)
        if (back.dual.masked(i, j) && u.masked(i, j))
          err = std::max(err, std::abs(back.dual.at(i, j) - u.at(i, j)));
    EstimateReport rep;
    rep.name = "legendre-involution";
    rep.samples.push_back({0.0, err, 2.0 * u.grid.spacing});
    rep.margin = 2.0 * u.grid.spacing - err;
    rep.pass = rep.margin >= 0;
    reports.push_back(rep);
  }

  {  // power-law conjugate: u = |x|^3 -> u* = c |y|^{3/2}, c = 2/3^{3/2}
    CartesianGrid g;
    g.dim = 2;
    g.spacing = 2.0 / 128;
    g.origin = vec2(-1, -1);
    g.counts = {129, 129, 1};
    GridFunction u(g);
    for (int j = 0; j < 129; ++j)
      for (int i = 0; i < 129; ++i) {
        Vec x = g.node(i, j);
        double r = std::hypot(x[0], x[1]);
        u.at(i, j) = r * r * r;
        u.mask[g.index(i, j)] = r < 1.0 ? 1 : 0;
      }
    DualField d = legendre_transform(u, 129);
    const double c = 2.0 / std::pow(3.0, 1.5);
    double err = 0;
    for (int j = 0; j < d.dual.grid.counts[1]; ++j)
      for (int i = 0; i < d.dual.grid.counts[0]; ++i) {
        if (!d.dual.masked(i, j)) continue;
        Vec y = d.dual.grid.node(i, j);
        double ry = std::hypot(y[0], y[1]);
        err = std::max(err, std::abs(d.dual.at(i, j) - c * std::pow(ry, 1.5)));
      }
    EstimateReport rep;
    rep.name = "legendre-power-law";
    rep.samples.push_back({0.0, err, 2.0 * d.dual.grid.spacing});
    rep.margin = 2.0 * d.dual.grid.spacing - err;
    rep.pass = rep.margin >= 0;
    reports.push_back(rep);
  }

  {  // Maclaurin chain (F_k / C(n,k))^{1/k} non-increasing
    std::vector<double> lambda{0.5, 1.2, 2.0, 3.1};
    auto choose = [](int n, int k) {
      double c = 1;
      for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
      return c;
    };
    double prev = 1e300, worst = -1e300;
    for (int k = 1; k <= 4; ++k) {
      double mk = std::pow(elementary_symmetric(lambda, k) / choose(4, k), 1.0 / k);
      worst = std::max(worst, mk - prev);
      prev = mk;
    }
    EstimateReport rep;
    rep.name = "maclaurin-ordering";
    rep.samples.push_back({0.0, worst, 0.0});
    rep.margin = -worst;
    rep.pass = rep.margin >= -1e-12;
    reports.push_back(rep);
  }

  FlowTrajectory traj = csf_run(make_ellipse(2.0, 1.0, 256), 0.6, 1e-3, 24);
  {
    AreaLawReport area = area_law_check(traj);
    EstimateReport rep;
    rep.name = "csf-area-law";
    rep.samples.push_back({0.0, area.deviation, 0.005});
    rep.margin = 0.005 - area.deviation;
    rep.pass = area.pass;
    reports.push_back(rep);
  }
  {
    RoundnessReport round = normalize_and_roundness(traj);
    double worst = -1e300;
    for (std::size_t i = 1; i < round.delta.size(); ++i)
      worst = std::max(worst, round.delta[i] - round.delta[i - 1]);
    EstimateReport rep;
    rep.name = "csf-roundness-decreasing";
    rep.samples.push_back({0.0, worst, 0.0});
    rep.margin = -worst;
    rep.pass = worst <= 1e-12;
    reports.push_back(rep);
  }
  {
    DecayReport decay = gage_hamilton_decay(traj);
    EstimateReport rep;
    rep.name = "csf-curvature-decay";
    rep.samples.push_back({0.0, decay.rate, 0.0});
    rep.margin = -decay.rate;
    rep.pass = decay.pass;
    rep.fitted["rate"] = decay.rate;
    reports.push_back(rep);
  }

  {  // width product and aspect bounds on the exact radial sigma=0 profile
    CartesianGrid g;
    g.dim = 2;
    g.spacing = 12.0 / 256;
    g.origin = vec2(-6, -6);
    g.counts = {257, 257, 1};
    GridFunction u(g);
    for (int j = 0; j < 257; ++j)
      for (int i = 0; i < 257; ++i) {
        Vec x = g.node(i, j);
        u.at(i, j) = 0.5 * (x[0] * x[0] + x[1] * x[1]);
        u.mask[g.index(i, j)] = 1;
      }
    reports.push_back(width_product_check(u, {1.0, 2.0, 4.0, 8.0}));
  }

  {  // log-concavity of the exact radial sigma=0 solution; the mask stays
     // inside r = 0.85, away from the log singularity at the zero level
    GridFunction u = quadratic_disk(129);
    for (int j = 0; j < 129; ++j)
      for (int i = 0; i < 129; ++i) {
        u.at(i, j) -= 0.5;
        Vec x = u.grid.node(i, j);
        u.mask[u.grid.index(i, j)] =
            x[0] * x[0] + x[1] * x[1] < 0.85 * 0.85 ? 1 : 0;
      }
    reports.push_back(log_concavity_check(u, 1e-6));
  }

  {  // radial n=3 sandwich bounds
    CartesianGrid g;
    g.dim = 3;
    g.spacing = 12.0 / 64;
    g.origin = vec3(-6, -6, -6);
    g.counts = {65, 65, 65};
    GridFunction u(g);
    for (int k = 0; k < 65; ++k)
      for (int j = 0; j < 65; ++j)
        for (int i = 0; i < 65; ++i) {
          Vec x = g.node(i, j, k);
          u.at(i, j, k) = dot(x, x, 3) / 4.0;  // |x|^2 / (2(n-1)), n = 3
          u.mask[g.index(i, j, k)] = 1;
        }
    reports.push_back(
        aspect_bounds_check(u, AspectBoundsKind::Primal48, {1.0, 2.0, 4.0}, 3));
  }

  {  // growth fit + blow-down classification of eta_2 in R^3
    FieldFn eta2 = [](const Vec& x) { return eta_profile(x, 2); };
    reports.push_back(growth_fit(eta2, 3, {1, 2, 4, 8, 16, 32}));
    BlowdownReport cls = classify_profile(eta2, 3, {4.0, 16.0, 64.0}, 41);
    EstimateReport rep;
    rep.name = "blowdown-eta2-rank";
    rep.samples.push_back({64.0, cls.errors.empty() ? 1.0 : cls.errors.back(), 1e-12});
    rep.margin = 1e-12 - (cls.errors.empty() ? 1.0 : cls.errors.back());
    rep.pass = cls.k == 2 && !cls.indeterminate && rep.margin >= 0;
    reports.push_back(rep);
    extras["blowdown_eta2"] = nlohmann::json::parse(cls.to_json());
  }

  bool all = true;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    all = all && r.pass;
    arr.push_back(nlohmann::json::parse(r.to_json()));
  }
  nlohmann::json j;
  j["reports"] = arr;
  j["extras"] = extras;
  j["all_pass"] = all;
  write_text(out_dir + "/verify.json", j.dump(2) + "\n");
  write_text(out_dir + "/summary.csv", estimate_summary_csv(reports));
  write_manifest(out_dir);
  std::cout << reports.size() << " reports, "
            << (all ? "all pass" : "FAILURES present") << "\n";
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for translating solitons and convex "
               "ancient mean curvature flows"};
  app.require_subcommand(1);
  int seed = 0;
  app.add_option("--seed", seed, "seed for randomized auxiliaries");

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Dirichlet solve on an ellipse/ellipsoid");
  solve->add_option("--n", sa.n, "ambient dimension")->check(CLI::Range(2, 3));
  solve->add_option("--r", sa.r, "transverse semi-axis")->check(CLI::PositiveNumber);
  solve->add_option("--t", sa.t, "axial semi-axis")->check(CLI::PositiveNumber);
  solve->add_option("--sigma", sa.sigma, "sigma in [0,1]")->check(CLI::Range(0.0, 1.0));
  solve->add_option("--resolution", sa.resolution)->check(CLI::Range(9, 1025));
  solve->add_flag("--continuation", sa.continuation, "warm-started sigma ladder");
  solve->add_flag("--log-transform", sa.log_transform, "psi = -log(-u) formulation");
  solve->add_option("--out", sa.out, "output directory")->required();

  ConstructArgs ca;
  auto* construct = app.add_subcommand("construct", "shooting constructions");
  construct->add_option("--n", ca.n)->check(CLI::Range(2, 8));
  construct->add_option("--K", ca.K)->check(CLI::PositiveNumber);
  construct->add_option("--theta", ca.theta)->check(CLI::PositiveNumber);
  construct->add_option("--mode", ca.mode)
      ->check(CLI::IsMember({"primal", "dual", "product"}));
  construct->add_option("--resolution", ca.resolution)->check(CLI::Range(17, 513));
  construct->add_option("--K-list", ca.k_list, "comma-separated family depths");
  construct->add_option("--out", ca.out)->required();

  CsfArgs fa;
  auto* csf = app.add_subcommand("csf", "curve shortening flow of an ellipse");
  csf->add_option("--a", fa.a)->check(CLI::PositiveNumber);
  csf->add_option("--b", fa.b)->check(CLI::PositiveNumber);
  csf->add_option("--N", fa.N)->check(CLI::Range(16, 4096));
  csf->add_option("--t-end", fa.t_end)->check(CLI::PositiveNumber);
  csf->add_option("--dt0", fa.dt0)->check(CLI::PositiveNumber);
  csf->add_option("--outputs", fa.outputs)->check(CLI::Range(5, 1000));
  csf->add_option("--out", fa.out)->required();

  BlowdownArgs ba;
  auto* blow = app.add_subcommand("blowdown", "rescaling classification");
  blow->add_option("--input", ba.input, "grid file or bowl2|eta2|eta3")->required();
  blow->add_option("--h-schedule", ba.schedule, "comma-separated increasing scales");
  blow->add_option("--resolution", ba.resolution)->check(CLI::Range(17, 513));
  blow->add_option("--out", ba.out)->required();

  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "reference estimate suite");
  verify->add_option("--out", verify_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve) return cmd_solve(sa);
    if (*construct) return cmd_construct(ca);
    if (*csf) return cmd_csf(fa);
    if (*blow) return cmd_blowdown(ba);
    if (*verify) return cmd_verify(verify_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
