#include "solitonforge/legendre.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "solitonforge/level_set.hpp"
#include "solitonforge/parallel.hpp"

namespace soliton {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Pt2 = std::array<double, 2>;

double cross(const Pt2& o, const Pt2& a, const Pt2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew monotone chain, CCW. Handles collinear/degenerate input by
// returning the (possibly < 3 point) chain.
std::vector<Pt2> convex_hull(std::vector<Pt2> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Pt2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  std::size_t lower = k + 1;
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

double hull_boundary_distance(const std::vector<Pt2>& hull, const Pt2& q) {
  double best = std::numeric_limits<double>::infinity();
  if (hull.size() == 1) {
    return std::hypot(q[0] - hull[0][0], q[1] - hull[0][1]);
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Pt2& a = hull[i];
    const Pt2& b = hull[(i + 1) % hull.size()];
    best = std::min(best, point_segment_distance(vec2(q[0], q[1]), vec2(a[0], a[1]),
                                                 vec2(b[0], b[1]), 2));
  }
  return best;
}

bool inside_hull(const std::vector<Pt2>& hull, const Pt2& q) {
  if (hull.size() < 3) return false;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (cross(hull[i], hull[(i + 1) % hull.size()], q) < 0) return false;
  }
  return true;
}

// Central-difference gradients at margin nodes, projected to the first two
// axes in 2-D (third component kept for 3-D bounding boxes).
std::vector<Vec> gradient_samples(const GridFunction& u) {
  const auto& g = u.grid;
  const double h = g.spacing;
  std::vector<Vec> out;
  for (int k = 0; k < g.counts[2]; ++k)
    for (int j = 0; j < g.counts[1]; ++j)
      for (int i = 0; i < g.counts[0]; ++i) {
        if (!u.has_interior_margin(i, j, k)) continue;
        Vec grad{(u.at(i + 1, j, k) - u.at(i - 1, j, k)) / (2 * h),
                 (u.at(i, j + 1, k) - u.at(i, j - 1, k)) / (2 * h), 0.0};
        if (g.dim == 3)
          grad[2] = (u.at(i, j, k + 1) - u.at(i, j, k - 1)) / (2 * h);
        out.push_back(grad);
      }
  return out;
}

struct PrimalSamples {
  std::vector<Vec> x;
  std::vector<double> ux;
};

PrimalSamples masked_samples(const GridFunction& u) {
  PrimalSamples s;
  const auto& g = u.grid;
  for (int k = 0; k < g.counts[2]; ++k)
    for (int j = 0; j < g.counts[1]; ++j)
      for (int i = 0; i < g.counts[0]; ++i) {
        std::size_t p = g.index(i, j, k);
        if (!u.mask[p] || !std::isfinite(u.values[p])) continue;
        s.x.push_back(g.node(i, j, k));
        s.ux.push_back(u.values[p]);
      }
  return s;
}

}  // namespace

DualField legendre_transform(const GridFunction& u, const CartesianGrid& dual_grid) {
  if (u.grid.dim != dual_grid.dim)
    throw std::invalid_argument("legendre_transform: dimension mismatch");
  PrimalSamples s = masked_samples(u);
  if (s.x.empty()) throw std::invalid_argument("legendre_transform: empty primal mask");

  DualField out;
  out.primal = u;
  out.has_primal = true;
  out.dual = GridFunction(dual_grid);

  std::vector<Vec> grads = gradient_samples(u);

  const int dim = dual_grid.dim;
  const double hd = dual_grid.spacing;

  // dual mask from the gradient-range hull shrunk by one dual spacing
  std::vector<Pt2> hull;
  Vec glo{}, ghi{};
  if (!grads.empty()) {
    for (int d = 0; d < 3; ++d) {
      glo[d] = std::numeric_limits<double>::infinity();
      ghi[d] = -glo[d];
    }
    for (const auto& gr : grads)
      for (int d = 0; d < dim; ++d) {
        glo[d] = std::min(glo[d], gr[d]);
        ghi[d] = std::max(ghi[d], gr[d]);
      }
  }
  if (dim == 2) {
    std::vector<Pt2> pts;
    pts.reserve(grads.size());
    for (const auto& gr : grads) pts.push_back({gr[0], gr[1]});
    hull = convex_hull(std::move(pts));
    out.gradient_hull = hull;
  }

  auto in_dual_mask = [&](const Vec& y) {
    if (grads.empty()) return false;
    if (dim == 2) {
      Pt2 q{y[0], y[1]};
      if (hull.size() >= 3)
        return inside_hull(hull, q) && hull_boundary_distance(hull, q) >= hd;
      // degenerate range (e.g. linear primal): keep nodes near the hull
      return hull_boundary_distance(hull, q) <= 0.5 * hd;
    }
    for (int d = 0; d < dim; ++d)
      if (y[d] < glo[d] + hd || y[d] > ghi[d] - hd) return false;
    return true;
  };

  const auto& dg = out.dual.grid;
  parallel_for(dg.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      int k = static_cast<int>(p / (dg.counts[0] * static_cast<std::size_t>(dg.counts[1])));
      std::size_t rem = p - static_cast<std::size_t>(k) * dg.counts[0] * dg.counts[1];
      int j = static_cast<int>(rem / dg.counts[0]);
      int i = static_cast<int>(rem % dg.counts[0]);
      Vec y = dg.node(i, j, k);
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t q = 0; q < s.x.size(); ++q)
        best = std::max(best, dot(s.x[q], y, dim) - s.ux[q]);
      if (in_dual_mask(y)) {
        out.dual.values[p] = best;
        out.dual.mask[p] = 1;
      } else {
        out.dual.values[p] = kNaN;
        out.dual.mask[p] = 0;
      }
    }
  });
  return out;
}

DualField legendre_transform(const GridFunction& u, int resolution) {
  if (resolution < 3) throw std::invalid_argument("legendre_transform: resolution >= 3");
  std::vector<Vec> grads = gradient_samples(u);
  if (grads.empty())
    throw std::invalid_argument("legendre_transform: mask too thin for gradients");
  const int dim = u.grid.dim;
  Vec glo{}, ghi{};
  for (int d = 0; d < 3; ++d) {
    glo[d] = std::numeric_limits<double>::infinity();
    ghi[d] = -glo[d];
  }
  for (const auto& gr : grads)
    for (int d = 0; d < dim; ++d) {
      glo[d] = std::min(glo[d], gr[d]);
      ghi[d] = std::max(ghi[d], gr[d]);
    }
  double longest = 0;
  for (int d = 0; d < dim; ++d) longest = std::max(longest, ghi[d] - glo[d]);
  if (!(longest > 0)) longest = 1.0;
  double h = longest / (resolution - 1);

  CartesianGrid dg;
  dg.dim = dim;
  dg.spacing = h;
  for (int d = 0; d < dim; ++d) {
    dg.origin[d] = glo[d] - h;
    dg.counts[d] = static_cast<int>(std::ceil((ghi[d] - glo[d]) / h)) + 3;
  }
  if (dim == 2) {
    dg.counts[2] = 1;
    dg.origin[2] = 0;
  }
  dg.validate();
  return legendre_transform(u, dg);
}

double elementary_symmetric(const std::vector<double>& lambda, int k) {
  const int n = static_cast<int>(lambda.size());
  if (k < 1 || k > n)
    throw std::invalid_argument("elementary_symmetric: k out of range");
  // coefficients of prod (t + lambda_i), built incrementally
  std::vector<double> e(n + 1, 0.0);
  e[0] = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::min(i + 1, k); j >= 1; --j) e[j] += lambda[i] * e[j - 1];
  return e[k];
}

GridFunction dual_equation_residual(const DualField& dual, double sigma) {
  const GridFunction& u = dual.dual;
  if (u.grid.dim != 2)
    throw std::invalid_argument("dual_equation_residual: 2-D only");
  const auto& g = u.grid;
  const double h = g.spacing, h2 = h * h;
  GridFunction res(g);
  for (auto& v : res.values) v = kNaN;
  for (int j = 0; j < g.counts[1]; ++j)
    for (int i = 0; i < g.counts[0]; ++i) {
      if (!u.has_interior_margin(i, j)) continue;
      double w11 = (u.at(i + 1, j) - 2 * u.at(i, j) + u.at(i - 1, j)) / h2;
      double w22 = (u.at(i, j + 1) - 2 * u.at(i, j) + u.at(i, j - 1)) / h2;
      double w12 = (u.at(i + 1, j + 1) - u.at(i + 1, j - 1) - u.at(i - 1, j + 1) +
                    u.at(i - 1, j - 1)) / (4 * h2);
      // positive definiteness: trace and determinant
      double det = w11 * w22 - w12 * w12;
      if (!(det > 0) || !(w11 + w22 > 0)) continue;  // flagged: left unmasked
      Vec y = g.node(i, j);
      double denom = sigma + y[0] * y[0] + y[1] * y[1];
      double a11 = 1.0 - y[0] * y[0] / denom;
      double a22 = 1.0 - y[1] * y[1] / denom;
      double a12 = -y[0] * y[1] / denom;
      // F^11 = w22, F^22 = w11, F^12 = -w12
      double trace = a11 * w22 + a22 * w11 - 2.0 * a12 * w12;
      std::size_t p = g.index(i, j);
      res.values[p] = det - trace;
      res.mask[p] = 1;
    }
  return res;
}

void SupportSamples::save_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("SupportSamples: cannot open " + path);
  os << "x1,x2,w\n";
  os.precision(17);
  for (int j = 0; j < counts[1]; ++j)
    for (int i = 0; i < counts[0]; ++i) {
      auto q = chart_point(i, j);
      os << q[0] << ',' << q[1] << ',' << w[index(i, j)] << '\n';
    }
}

SupportSamples SupportSamples::load_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("SupportSamples: cannot open " + path);
  std::string line;
  std::getline(is, line);  // header
  std::vector<double> x1, x2, wv;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    double a, b, c;
    char comma;
    if (!(ss >> a >> comma >> b >> comma >> c))
      throw std::runtime_error("SupportSamples: malformed row: " + line);
    x1.push_back(a);
    x2.push_back(b);
    wv.push_back(c);
  }
  if (x1.empty()) throw std::runtime_error("SupportSamples: empty file");

  SupportSamples s;
  // infer the grid: count distinct leading x1 values in the first row block
  int nx = 1;
  while (nx < static_cast<int>(x1.size()) && x1[nx] > x1[nx - 1]) ++nx;
  s.counts[0] = nx;
  s.counts[1] = static_cast<int>(x1.size()) / nx;
  if (s.counts[0] * s.counts[1] != static_cast<int>(x1.size()))
    throw std::runtime_error("SupportSamples: ragged grid");
  s.chart_dim = s.counts[1] > 1 ? 2 : 1;
  s.x_min = x1[0];
  s.step = nx > 1 ? x1[1] - x1[0] : 1.0;
  s.w = std::move(wv);
  return s;
}

SupportSamples support_function(const GridFunction& u, int directions) {
  if (directions < 8)
    throw std::invalid_argument("support_function: need at least 8 directions");
  if (u.grid.dim != 2)
    throw std::invalid_argument("support_function: 2-D primal grid required");
  PrimalSamples s = masked_samples(u);
  if (s.x.empty()) throw std::invalid_argument("support_function: empty mask");

  // chart extent from the gradient range, clipped to |x| <= 10
  std::vector<Vec> grads = gradient_samples(u);
  double range = 1.0;
  if (!grads.empty()) {
    range = 0.0;
    for (const auto& gr : grads)
      range = std::max({range, std::abs(gr[0]), std::abs(gr[1])});
    range = std::max(range - u.grid.spacing, 0.1 * u.grid.spacing);
  }
  range = std::min(range, 10.0);

  SupportSamples out;
  out.chart_dim = 2;
  int m = std::max(3, static_cast<int>(std::floor(std::sqrt(static_cast<double>(directions)))));
  out.counts = {m, m};
  out.x_min = -range;
  out.step = 2.0 * range / (m - 1);
  out.w.assign(static_cast<std::size_t>(m) * m, 0.0);

  parallel_for(out.w.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      int j = static_cast<int>(p) / m;
      int i = static_cast<int>(p) % m;
      auto q = out.chart_point(i, j);
      double fac = 1.0 / std::sqrt(1.0 + q[0] * q[0] + q[1] * q[1]);
      // p.(X, u(X)) with p = (x, -1) * fac
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t s_i = 0; s_i < s.x.size(); ++s_i)
        best = std::max(best, q[0] * s.x[s_i][0] + q[1] * s.x[s_i][1] - s.ux[s_i]);
      out.w[p] = fac * best;
    }
  });
  return out;
}

std::vector<double> hessian_quotient_residual(const SupportSamples& sw) {
  const int m = sw.chart_dim;
  if (m != 1 && m != 2)
    throw std::invalid_argument("hessian_quotient_residual: chart_dim must be 1 or 2");
  const double h = sw.step;
  std::vector<double> res(sw.w.size(), kNaN);

  // recover ustar = w * sqrt(1+|x|^2) on the chart; the restricted Hessian
  // grad^2 w + w I in an orthonormal sphere frame has the generalized
  // eigenvalues of (M, G) with M = sqrt(1+|x|^2) D^2 ustar(x) and
  // G = I - x x^T / (1+|x|^2) (metric of the chart map p = (x,-1)/sqrt(1+|x|^2))
  auto ustar = [&](int i, int j) {
    auto q = sw.chart_point(i, j);
    return sw.w[sw.index(i, j)] * std::sqrt(1.0 + q[0] * q[0] + q[1] * q[1]);
  };

  for (int j = 0; j < sw.counts[1]; ++j)
    for (int i = 0; i < sw.counts[0]; ++i) {
      if (i == 0 || i == sw.counts[0] - 1) continue;
      if (m == 2 && (j == 0 || j == sw.counts[1] - 1)) continue;
      auto q = sw.chart_point(i, j);
      double x2 = q[0] * q[0] + q[1] * q[1];
      if (x2 > 100.0) continue;  // equator cut-off |x| = 10
      double srt = std::sqrt(1.0 + x2);

      std::vector<double> radii;
      if (m == 1) {
        double upp = (ustar(i + 1, j) - 2 * ustar(i, j) + ustar(i - 1, j)) / (h * h);
        double M = srt * upp;
        double G = 1.0 - q[0] * q[0] / (1.0 + x2);
        radii = {M / G};
      } else {
        double u11 = (ustar(i + 1, j) - 2 * ustar(i, j) + ustar(i - 1, j)) / (h * h);
        double u22 = (ustar(i, j + 1) - 2 * ustar(i, j) + ustar(i, j - 1)) / (h * h);
        double u12 = (ustar(i + 1, j + 1) - ustar(i + 1, j - 1) - ustar(i - 1, j + 1) +
                      ustar(i - 1, j - 1)) / (4 * h * h);
        Eigen::Matrix2d M, G;
        M << u11, u12, u12, u22;
        M *= srt;
        G << 1.0 - q[0] * q[0] / (1.0 + x2), -q[0] * q[1] / (1.0 + x2),
            -q[0] * q[1] / (1.0 + x2), 1.0 - q[1] * q[1] / (1.0 + x2);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> es(M, G);
        if (es.info() != Eigen::Success) continue;
        radii = {es.eigenvalues()[0], es.eigenvalues()[1]};
      }

      double fm = elementary_symmetric(radii, m);
      double fm1 = m == 1 ? 1.0 : elementary_symmetric(radii, m - 1);
      if (!(fm1 > 0)) continue;  // degenerate sample
      res[sw.index(i, j)] = fm / fm1 - srt;
    }
  return res;
}

DualField solve_dual_dirichlet(const EllipsoidDomain& domain,
                               const std::function<double(const Vec&)>& phi,
                               double tol, int resolution) {
  domain.validate();
  if (domain.dim != 2)
    throw std::invalid_argument("solve_dual_dirichlet: 2-D only");
  ProblemSpec spec;
  spec.domain = ImplicitDomain::from(domain);
  spec.kind = OperatorKind::DualMongeAmpere;
  spec.boundary = phi;
  SolverConfig config;
  config.tolerance = tol;
  auto result = newton_solve(spec, config, resolution);
  DualField out;
  out.dual = std::move(result.u);
  out.has_primal = false;
  out.stats = result.stats;  // on failure the best iterate is still returned
  return out;
}

}  // namespace soliton
