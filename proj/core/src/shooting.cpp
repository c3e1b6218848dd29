#include "solitonforge/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "solitonforge/legendre.hpp"
#include "solitonforge/level_set.hpp"

namespace soliton {

namespace {

const char* mode_name(ShootingMode m) {
  return m == ShootingMode::PrimalSigmaZero ? "primal-sigma0" : "dual-sigma1";
}

struct ProbeOut {
  double M = 0.0;
  double aspect = 0.0;
  GridFunction u;
};

using Probe = std::function<ProbeOut(double r, double t)>;

struct ShootState {
  Probe probe;
  double K, theta;
  ShootingTolerances tol;
  std::vector<std::string> trace;
  int probes = 0;

  [[noreturn]] void fail(const std::string& what) {
    std::ostringstream os;
    os << "shoot_parameters: " << what << "\n";
    for (const auto& line : trace) os << "  " << line << "\n";
    throw std::runtime_error(os.str());
  }

  ProbeOut run(double r, double t) {
    if (++probes > tol.max_probes) fail("probe budget exhausted");
    ProbeOut out;
    try {
      out = probe(r, t);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "probe at r=" << r << " t=" << t << " failed: " << e.what();
      fail(os.str());
    }
    std::ostringstream os;
    os << "r=" << r << " t=" << t << " M=" << out.M << " aspect=" << out.aspect;
    trace.push_back(os.str());
    return out;
  }
};

struct InnerResult {
  double t;
  ProbeOut out;
};

// Bisection on t at fixed r for M_{r,t} = K; M is monotone increasing in t.
InnerResult inner_solve(ShootState& st, double r, double t0) {
  constexpr double t_min = 1e-2, t_max = 1e3;
  std::vector<std::pair<double, double>> seen;  // (t, M) of this inner loop
  // sanity guard only: genuine non-monotonicity is O(1), discretization
  // wobble is O(spacing), so the slack sits well above the target tolerance
  const double slack = 10.0 * st.tol.depth_tol;
  auto check_monotone = [&](double t, double M) {
    for (const auto& [ts, Ms] : seen) {
      if ((t > ts && M < Ms - slack) || (t < ts && M > Ms + slack))
        st.fail("M_{r,t} non-monotone in t (discretization artifact)");
    }
    seen.emplace_back(t, M);
  };

  double t = std::clamp(t0, t_min, t_max);
  ProbeOut out = st.run(r, t);
  check_monotone(t, out.M);

  double lo = t, hi = t;
  ProbeOut lo_out = out, hi_out = out;
  while (lo_out.M > st.K) {
    hi = lo;
    hi_out = lo_out;
    lo /= 1.6;
    if (lo < t_min) st.fail("no lower t bracket for M = K");
    lo_out = st.run(r, lo);
    check_monotone(lo, lo_out.M);
  }
  while (hi_out.M < st.K) {
    lo = hi;
    lo_out = hi_out;
    hi *= 1.6;
    if (hi > t_max) st.fail("no upper t bracket for M = K");
    hi_out = st.run(r, hi);
    check_monotone(hi, hi_out.M);
  }
  if (std::abs(lo_out.M - st.K) <= st.tol.depth_tol) return {lo, std::move(lo_out)};
  if (std::abs(hi_out.M - st.K) <= st.tol.depth_tol) return {hi, std::move(hi_out)};

  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    ProbeOut mo = st.run(r, mid);
    check_monotone(mid, mo.M);
    if (std::abs(mo.M - st.K) <= st.tol.depth_tol) return {mid, std::move(mo)};
    if (mo.M < st.K)
      lo = mid;
    else
      hi = mid;
  }
  st.fail("inner bisection stalled");
}

ShootingResult shoot_generic(ShootState& st, double t0, ShootingMode mode) {
  constexpr double r_min = 1e-2, r_max = 1e3;

  auto eval = [&](double r) { return inner_solve(st, r, t0); };

  double r = std::clamp(t0, r_min, r_max);
  InnerResult cur = eval(r);

  double lo = r, hi = r;
  InnerResult lo_res = cur, hi_res = cur;
  while (lo_res.out.aspect > st.theta) {
    hi = lo;
    hi_res = lo_res;
    lo /= 1.6;
    if (lo < r_min) st.fail("no lower r bracket for aspect = theta");
    lo_res = eval(lo);
  }
  while (hi_res.out.aspect < st.theta) {
    lo = hi;
    lo_res = hi_res;
    hi *= 1.6;
    if (hi > r_max) st.fail("no upper r bracket for aspect = theta");
    hi_res = eval(hi);
  }

  double best_r = hi;
  InnerResult best = hi_res;
  if (std::abs(lo_res.out.aspect - st.theta) < std::abs(best.out.aspect - st.theta)) {
    best_r = lo;
    best = lo_res;
  }
  for (int it = 0;
       it < 60 && std::abs(best.out.aspect - st.theta) > st.tol.aspect_tol; ++it) {
    double mid = 0.5 * (lo + hi);
    InnerResult mo = eval(mid);
    if (std::abs(mo.out.aspect - st.theta) < std::abs(best.out.aspect - st.theta)) {
      best_r = mid;
      best = mo;
    }
    if (mo.out.aspect < st.theta)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-6 * hi) break;
  }

  ShootingResult res;
  res.r = best_r;
  res.t = best.t;
  res.depth = best.out.M;
  res.aspect = best.out.aspect;
  res.target_depth = st.K;
  res.target_aspect = st.theta;
  res.depth_residual = std::abs(res.depth - st.K);
  res.aspect_residual = std::abs(res.aspect - st.theta);
  res.converged = res.depth_residual <= st.tol.depth_tol &&
                  res.aspect_residual <= st.tol.aspect_tol;
  res.mode = mode;
  res.solution = std::move(best.out.u);
  res.trace = st.trace;
  return res;
}

GridFunction primal_sigma0_solve(const EllipsoidDomain& dom, int resolution) {
  SolverConfig config;
  config.sigma = 0.0;
  auto direct = solve_dirichlet(dom, config, 0.0, resolution);
  if (direct.stats.converged) return std::move(direct.u);
  // fall back to a sigma continuation ladder; the tail stays above eps_reg,
  // where sigma_eff already coincides with the regularized sigma=0 operator
  auto chain =
      sigma_continuation(dom, {1.0, 0.1, 0.01, 1e-3, 1e-6}, config, resolution);
  if (!chain.back().stats.converged || chain.back().stats.final_residual > config.tolerance)
    throw std::runtime_error("primal sigma=0 solve failed to converge");
  return std::move(chain.back().u);
}

// extent of {u < h} along the first row / column of a quarter grid
double reduced_axis_extent(const GridFunction& u, double h, int axis) {
  const auto& g = u.grid;
  int count = g.counts[axis];
  double prev = u.at(0, 0);
  Vec prev_node = g.node(0, 0);
  for (int i = 1; i < count; ++i) {
    int ii = axis == 0 ? i : 0;
    int jj = axis == 0 ? 0 : i;
    double v = u.at(ii, jj);
    Vec node = g.node(ii, jj);
    if (!std::isfinite(v)) break;
    if (prev < h && v >= h) {
      double f = (h - prev) / (v - prev);
      return prev_node[axis] + f * (node[axis] - prev_node[axis]);
    }
    prev = v;
    prev_node = node;
  }
  throw std::runtime_error("reduced_axis_extent: level not crossed");
}

}  // namespace

std::pair<double, double> level_max_and_aspect(const GridFunction& u) {
  double M = -u.min_masked();
  if (!(M > 1))
    throw std::invalid_argument("level_max_and_aspect: min u >= -1, level empty");
  ExtentRecord ext = level_set_extents(u, -M + 1);
  if (ext.truncated())
    throw std::runtime_error("level_max_and_aspect: level set truncated");
  return {M, ext.transverse_inradius / (0.5 * ext.axial_width)};
}

ShootingResult shoot_parameters(int n, double K, double theta, ShootingMode mode,
                                const ShootingTolerances& tol) {
  if (!(K > 1)) throw std::invalid_argument("shoot_parameters: K > 1 required");
  if (!(theta > 0)) throw std::invalid_argument("shoot_parameters: theta > 0");
  if (n < 2 || n > 3) throw std::invalid_argument("shoot_parameters: n in {2,3}");
  if (mode == ShootingMode::DualSigmaOne) return dual_construction(n, theta, K, tol);

  ShootState st;
  st.K = K;
  st.theta = theta;
  st.tol = tol;
  st.probe = [&](double r, double t) {
    EllipsoidDomain dom{n, r, t};
    ProbeOut out;
    out.u = primal_sigma0_solve(dom, tol.resolution);
    std::tie(out.M, out.aspect) = level_max_and_aspect(out.u);
    return out;
  };
  double t0 = std::sqrt(2.0 * (n - 1) * K);
  return shoot_generic(st, t0, ShootingMode::PrimalSigmaZero);
}

SolitonFamily build_family(int n, double theta, const std::vector<double>& K_list,
                           ShootingMode mode, const ShootingTolerances& tol) {
  for (std::size_t i = 1; i < K_list.size(); ++i)
    if (K_list[i] <= K_list[i - 1])
      throw std::invalid_argument("build_family: K_list must be increasing");

  SolitonFamily fam;
  fam.theta = theta;
  fam.mode = mode;
  fam.complete = true;
  for (double K : K_list) {
    FamilyEntry entry;
    entry.k = K;
    try {
      ShootingResult res = shoot_parameters(n, K, theta, mode, tol);
      entry.domain = EllipsoidDomain{n, res.r, res.t};
      entry.w = std::move(res.solution);
      double shift = entry.w.min_masked();
      for (std::size_t p = 0; p < entry.w.values.size(); ++p)
        if (std::isfinite(entry.w.values[p])) entry.w.values[p] -= shift;
      entry.converged = res.converged;
    } catch (const std::exception&) {
      entry.converged = false;
      fam.complete = false;
      fam.entries.push_back(std::move(entry));
      break;  // partial family with failure marker
    }
    fam.complete = fam.complete && entry.converged;
    fam.entries.push_back(std::move(entry));
  }
  return fam;
}

GridFunction product_construction(int n, double theta, double K,
                                  const ShootingTolerances& tol) {
  if (n < 4) throw std::invalid_argument("product_construction: n >= 4 required");
  if (!(K > 1 && theta > 0))
    throw std::invalid_argument("product_construction: K > 1 and theta > 0");

  ShootState st;
  st.K = K;
  st.theta = theta;
  st.tol = tol;
  st.probe = [&](double r, double t) {
    ProblemSpec spec;
    spec.domain.dim = 2;
    spec.domain.lo = vec2(0, 0);
    spec.domain.hi = vec2(r, t);
    spec.domain.level = [r, t](const Vec& x) {
      return x[0] * x[0] / (r * r) + x[1] * x[1] / (t * t) - 1.0;
    };
    spec.kind = OperatorKind::ReducedProduct;
    spec.reduced_ambient_n = n;
    spec.cell_centered = true;
    spec.boundary = [](const Vec&) { return 0.0; };
    SolverConfig config;
    auto result = newton_solve(spec, config, tol.resolution);
    if (!result.stats.converged)
      throw std::runtime_error("product_construction: reduced solve failed");
    ProbeOut out;
    out.M = -result.u.min_masked();
    if (out.M > 1) {
      double s_ext = reduced_axis_extent(result.u, -out.M + 1, 0);
      double t_ext = reduced_axis_extent(result.u, -out.M + 1, 1);
      out.aspect = s_ext / t_ext;
    }
    out.u = std::move(result.u);
    return out;
  };
  double t0 = std::sqrt(2.0 * (n - 1) * K);
  ShootingResult res = shoot_generic(st, t0, ShootingMode::PrimalSigmaZero);

  GridFunction w = std::move(res.solution);
  double shift = w.min_masked();
  for (std::size_t p = 0; p < w.values.size(); ++p)
    if (std::isfinite(w.values[p])) w.values[p] -= shift;
  return w;
}

ShootingResult dual_construction(int n, double theta, double K,
                                 const ShootingTolerances& tol) {
  if (n != 2)
    throw std::invalid_argument("dual_construction: 2-D acceptance path only");
  if (!(K > 1 && theta > 0))
    throw std::invalid_argument("dual_construction: K > 1 and theta > 0");

  ShootState st;
  st.K = K;
  st.theta = theta;
  st.tol = tol;
  st.probe = [&](double r, double t) {
    EllipsoidDomain dom{2, r, t};
    DualField dual = solve_dual_dirichlet(
        dom, [](const Vec&) { return 0.0; }, 1e-8, tol.resolution);
    if (!dual.stats.converged)
      throw std::runtime_error("dual_construction: dual Newton failed");
    ProbeOut out;
    out.u = std::move(dual.dual);
    std::tie(out.M, out.aspect) = level_max_and_aspect(out.u);
    return out;
  };
  double t0 = std::sqrt(2.0 * (n - 1) * K);
  ShootingResult res = shoot_generic(st, t0, ShootingMode::DualSigmaOne);

  // back-transform the tuned dual solution to the primal graph
  DualField primal = legendre_transform(res.solution, tol.resolution);
  GridFunction w = std::move(primal.dual);
  double shift = w.min_masked();
  for (std::size_t p = 0; p < w.values.size(); ++p)
    if (std::isfinite(w.values[p])) w.values[p] -= shift;
  res.solution = std::move(w);
  return res;
}

std::string ShootingResult::to_json(const std::string& solution_path) const {
  nlohmann::json j;
  j["r"] = r;
  j["t"] = t;
  j["depth"] = depth;
  j["aspect"] = aspect;
  j["target_depth"] = target_depth;
  j["target_aspect"] = target_aspect;
  j["depth_residual"] = depth_residual;
  j["aspect_residual"] = aspect_residual;
  j["converged"] = converged;
  j["mode"] = mode_name(mode);
  j["solution"] = solution_path;
  j["trace"] = trace;
  return j.dump(2);
}

std::string SolitonFamily::to_json(const std::vector<std::string>& entry_paths) const {
  if (entry_paths.size() != entries.size())
    throw std::invalid_argument("SolitonFamily::to_json: path count mismatch");
  nlohmann::json j;
  j["theta"] = theta;
  j["mode"] = mode_name(mode);
  j["complete"] = complete;
  j["entries"] = nlohmann::json::array();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    nlohmann::json e;
    e["k"] = entries[i].k;
    e["converged"] = entries[i].converged;
    e["domain_r"] = entries[i].domain.r;
    e["domain_t"] = entries[i].domain.t;
    e["field"] = entry_paths[i];
    j["entries"].push_back(e);
  }
  return j.dump(2);
}

}  // namespace soliton
