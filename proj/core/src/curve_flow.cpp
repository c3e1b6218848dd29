#include "solitonforge/curve_flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "solitonforge/elliptic.hpp"
#include "solitonforge/level_set.hpp"

namespace soliton {

namespace {

// Trigonometric collocation differentiation matrices for even N
// (Trefethen, "Spectral Methods in MATLAB", ch. 3). Cached per N.
struct SpectralMatrices {
  std::vector<double> d1, d2;  // N x N row-major
};

const SpectralMatrices& spectral_matrices(int N) {
  static std::map<int, SpectralMatrices> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(N);
  if (it != cache.end()) return it->second;

  SpectralMatrices m;
  m.d1.assign(static_cast<std::size_t>(N) * N, 0.0);
  m.d2.assign(static_cast<std::size_t>(N) * N, 0.0);
  const double h = 2.0 * M_PI / N;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      std::size_t p = static_cast<std::size_t>(i) * N + j;
      if (i == j) {
        m.d1[p] = 0.0;
        m.d2[p] = -M_PI * M_PI / (3.0 * h * h) - 1.0 / 6.0;
      } else {
        int k = i - j;
        double sgn = (k % 2 == 0) ? 1.0 : -1.0;
        double s = std::sin(0.5 * k * h);
        m.d1[p] = 0.5 * sgn * std::cos(0.5 * k * h) / s;
        m.d2[p] = -sgn / (2.0 * s * s);
      }
    }
  return cache.emplace(N, std::move(m)).first->second;
}

std::vector<double> matvec(const std::vector<double>& M, const std::vector<double>& v) {
  const int N = static_cast<int>(v.size());
  std::vector<double> out(N, 0.0);
  for (int i = 0; i < N; ++i) {
    const double* row = M.data() + static_cast<std::size_t>(i) * N;
    double s = 0;
    for (int j = 0; j < N; ++j) s += row[j] * v[j];
    out[i] = s;
  }
  return out;
}

// least-squares slope and intercept of y against x
std::pair<double, double> line_fit(const std::vector<double>& x,
                                   const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  double slope = (n * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / n;
  return {slope, intercept};
}

}  // namespace

void SupportCurve::validate() const {
  if (N < 8 || static_cast<int>(w.size()) != N)
    throw std::invalid_argument("SupportCurve: need N >= 8 and |w| == N");
  if (N % 2 != 0) throw std::invalid_argument("SupportCurve: N must be even");
}

SupportCurve make_circle(double radius, int N) {
  SupportCurve c{N, std::vector<double>(N, radius)};
  c.validate();
  return c;
}

SupportCurve make_ellipse(double a, double b, int N) {
  SupportCurve c{N, std::vector<double>(N)};
  for (int i = 0; i < N; ++i) {
    double th = 2.0 * M_PI * i / N;
    double ca = a * std::cos(th), sb = b * std::sin(th);
    c.w[i] = std::sqrt(ca * ca + sb * sb);
  }
  c.validate();
  return c;
}

std::vector<double> periodic_derivative(const std::vector<double>& f) {
  return matvec(spectral_matrices(static_cast<int>(f.size())).d1, f);
}

std::vector<double> periodic_second_derivative(const std::vector<double>& f) {
  return matvec(spectral_matrices(static_cast<int>(f.size())).d2, f);
}

bool is_convex(const SupportCurve& c) {
  c.validate();
  auto w2 = periodic_second_derivative(c.w);
  for (int i = 0; i < c.N; ++i)
    if (!(w2[i] + c.w[i] > 0)) return false;
  return true;
}

SupportGeometry support_geometry(const SupportCurve& c) {
  c.validate();
  auto w2 = periodic_second_derivative(c.w);
  SupportGeometry g;
  g.curvature.resize(c.N);
  const double dth = 2.0 * M_PI / c.N;
  for (int i = 0; i < c.N; ++i) {
    double speed = w2[i] + c.w[i];
    if (!(speed > 0))
      throw std::invalid_argument("support_geometry: curve not convex");
    g.curvature[i] = 1.0 / speed;
    g.area += 0.5 * c.w[i] * speed * dth;
  }
  return g;
}

FlowTrajectory csf_run(const SupportCurve& w0, double t_end, double dt0,
                       int output_count) {
  w0.validate();
  if (!is_convex(w0)) throw std::invalid_argument("csf_run: w0 not convex");
  if (!(t_end > 0) || !(dt0 > 0))
    throw std::invalid_argument("csf_run: t_end and dt0 must be positive");
  if (output_count < 2) throw std::invalid_argument("csf_run: output_count >= 2");

  FlowTrajectory traj;
  double area0 = support_geometry(w0).area;
  traj.extinction_estimate = area0 / (2.0 * M_PI);
  if (t_end >= traj.extinction_estimate)
    throw std::invalid_argument("csf_run: t_end beyond extinction estimate");

  const int N = w0.N;
  const double dth = 2.0 * M_PI / N;
  const double dt_min = 1e-14;

  auto velocity = [&](const std::vector<double>& w, double* min_speed) {
    auto w2 = periodic_second_derivative(w);
    std::vector<double> v(N);
    double ms = std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i) {
      double speed = w2[i] + w[i];
      ms = std::min(ms, speed);
      v[i] = speed > 0 ? -1.0 / speed : 0.0;
    }
    *min_speed = ms;
    return v;
  };

  std::vector<double> w = w0.w;
  double t = 0.0;
  int next_out = 0;
  auto store = [&](double time, const std::vector<double>& values) {
    SupportCurve c{N, values};
    traj.times.push_back(time);
    traj.areas.push_back(support_geometry(c).area);
    traj.curves.push_back(std::move(c));
  };

  while (true) {
    double target = t_end * next_out / (output_count - 1);
    if (t >= target - 1e-15) {
      store(t, w);
      ++next_out;
      if (next_out >= output_count) break;
      target = t_end * next_out / (output_count - 1);
    }

    double ms = 0;
    auto k1 = velocity(w, &ms);
    if (!(ms > 0)) {
      traj.aborted = true;
      break;
    }
    double dt = std::min(dt0, 0.2 * ms * ms * dth * dth);
    dt = std::min(dt, target - t);
    if (dt < dt_min) {
      traj.aborted = true;
      break;
    }

    std::vector<double> wm(N);
    for (int i = 0; i < N; ++i) wm[i] = w[i] + 0.5 * dt * k1[i];
    double ms_mid = 0;
    auto k2 = velocity(wm, &ms_mid);
    if (!(ms_mid > 0)) {
      traj.aborted = true;
      break;
    }
    for (int i = 0; i < N; ++i) w[i] += dt * k2[i];
    t += dt;
  }
  return traj;
}

AreaLawReport area_law_check(const FlowTrajectory& traj) {
  if (traj.times.size() < 5)
    throw std::invalid_argument("area_law_check: need >= 5 stored times");
  AreaLawReport rep;
  rep.slope = line_fit(traj.times, traj.areas).first;
  rep.deviation = std::abs(rep.slope + 2.0 * M_PI) / (2.0 * M_PI);
  rep.pass = rep.deviation <= 0.005;
  return rep;
}

RoundnessReport normalize_and_roundness(const FlowTrajectory& traj) {
  if (traj.times.size() < 5)
    throw std::invalid_argument("normalize_and_roundness: need >= 5 stored times");
  auto [slope, intercept] = line_fit(traj.times, traj.areas);
  if (!(slope < 0))
    throw std::invalid_argument("normalize_and_roundness: areas not decreasing");
  RoundnessReport rep;
  rep.extinction_time = -intercept / slope;

  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    double t = traj.times[s];
    if (t > 0.95 * rep.extinction_time) continue;
    double scale = std::sqrt(2.0 * (rep.extinction_time - t));
    SupportCurve c = traj.curves[s];
    for (auto& v : c.w) v /= scale;

    // best-fit circle: w ~ rho + a cos + b sin; for convex bodies the
    // sup-norm of the support-function gap equals the Hausdorff distance
    double rho = 0, a = 0, b = 0;
    for (int i = 0; i < c.N; ++i) {
      double th = c.theta(i);
      rho += c.w[i];
      a += c.w[i] * std::cos(th);
      b += c.w[i] * std::sin(th);
    }
    rho /= c.N;
    a *= 2.0 / c.N;
    b *= 2.0 / c.N;
    double d = 0;
    for (int i = 0; i < c.N; ++i) {
      double th = c.theta(i);
      d = std::max(d, std::abs(c.w[i] - rho - a * std::cos(th) - b * std::sin(th)));
    }
    rep.times.push_back(t);
    rep.normalized.push_back(std::move(c));
    rep.delta.push_back(d);
  }
  return rep;
}

DecayReport gage_hamilton_decay(const FlowTrajectory& traj) {
  RoundnessReport norm = normalize_and_roundness(traj);
  DecayReport rep;
  const double T = norm.extinction_time;
  for (std::size_t s = 0; s < norm.times.size(); ++s) {
    const SupportCurve& c = norm.normalized[s];
    auto w2 = periodic_second_derivative(c.w);
    std::vector<double> kappa(c.N);
    for (int i = 0; i < c.N; ++i) {
      double speed = w2[i] + c.w[i];
      if (!(speed > 0)) return rep;  // not applicable on a degenerate state
      kappa[i] = 1.0 / speed;
    }
    auto dk = periodic_derivative(kappa);
    // integral (dkappa/ds)^2 ds = integral (dkappa/dtheta)^2 / (w''+w) dtheta
    double e = 0;
    const double dth = 2.0 * M_PI / c.N;
    for (int i = 0; i < c.N; ++i) e += dk[i] * dk[i] / (w2[i] + c.w[i]) * dth;
    rep.tau.push_back(-0.5 * std::log(1.0 - norm.times[s] / T));
    rep.log_energy.push_back(e > 0 ? std::log(e) : -std::numeric_limits<double>::infinity());
  }

  double emax = -std::numeric_limits<double>::infinity();
  for (double le : rep.log_energy) emax = std::max(emax, le);
  if (!(emax > std::log(1e-12))) {
    rep.applicable = false;  // circle branch: nothing to decay
    rep.pass = true;
    return rep;
  }
  rep.applicable = true;
  rep.rate = line_fit(rep.tau, rep.log_energy).first;
  rep.pass = rep.rate < 0;
  return rep;
}

void FlowTrajectory::export_csv(const std::string& prefix) const {
  RoundnessReport norm;
  DecayReport decay;
  bool have_diag = false;
  if (times.size() >= 5 && !aborted) {
    try {
      norm = normalize_and_roundness(*this);
      decay = gage_hamilton_decay(*this);
      have_diag = true;
    } catch (const std::exception&) {
    }
  }

  std::ofstream os(prefix + "_trajectory.csv");
  if (!os) throw std::runtime_error("export_csv: cannot open " + prefix);
  os << "t,area,delta_t,kprime_energy\n";
  os.precision(17);
  for (std::size_t s = 0; s < times.size(); ++s) {
    double d = std::numeric_limits<double>::quiet_NaN();
    double e = std::numeric_limits<double>::quiet_NaN();
    if (have_diag) {
      for (std::size_t q = 0; q < norm.times.size(); ++q)
        if (norm.times[q] == times[s]) {
          d = norm.delta[q];
          if (q < decay.log_energy.size()) e = std::exp(decay.log_energy[q]);
          break;
        }
    }
    os << times[s] << ',' << areas[s] << ',' << d << ',' << e << '\n';
  }

  for (std::size_t s = 0; s < curves.size(); ++s) {
    std::ostringstream name;
    name << prefix << "_curve_" << std::setw(4) << std::setfill('0') << s << ".csv";
    std::ofstream cs(name.str());
    cs << "theta,w\n";
    cs.precision(17);
    for (int i = 0; i < curves[s].N; ++i)
      cs << curves[s].theta(i) << ',' << curves[s].w[i] << '\n';
  }
}

double area_deficit(const EllipsoidDomain& domain, double sigma, double h,
                    int resolution) {
  domain.validate();
  if (domain.dim != 2) throw std::invalid_argument("area_deficit: 2-D only");
  if (!(sigma > 0 && sigma <= 1))
    throw std::invalid_argument("area_deficit: sigma in (0, 1]");

  SolverConfig config;
  config.sigma = sigma;
  // cold-start Newton stalls once sigma is far below 1: reach small sigma
  // through its own descending ladder
  DirichletResult res_sigma;
  if (sigma >= 0.05) {
    res_sigma = solve_dirichlet(domain, config, 0.0, resolution);
  } else {
    std::vector<double> down{1.0};
    while (down.back() > 10.0 * sigma) down.push_back(down.back() * 0.1);
    down.push_back(sigma);
    auto pre = sigma_continuation(domain, down, config, resolution);
    res_sigma = std::move(pre.back());
  }
  if (!res_sigma.stats.converged)
    throw std::runtime_error("area_deficit: sigma solve failed");

  // sigma -> 0 continuation warm-started from the sigma solve
  // the tail stops at 1e-6, below the discretization error of the sigma term
  std::vector<double> ladder;
  for (double s = sigma; s > 1e-5; s *= 0.1) ladder.push_back(s);
  ladder.push_back(1e-6);
  auto chain = sigma_continuation(domain, ladder, config, resolution);
  const auto& res_zero = chain.back();
  if (!res_zero.stats.converged)
    throw std::runtime_error("area_deficit: continuation to sigma=0 failed");

  if (!(h > res_sigma.u.min_masked() && h < 0))
    throw std::invalid_argument("area_deficit: level h outside solution range");

  auto pick_area = [&](const GridFunction& u) {
    auto lines = extract_level_set(u, h);
    for (const auto& pl : lines)
      if (pl.closed) return std::abs(pl.signed_area());
    throw std::runtime_error("area_deficit: level set truncated");
  };
  return pick_area(res_zero.u) - pick_area(res_sigma.u);
}

}  // namespace soliton
