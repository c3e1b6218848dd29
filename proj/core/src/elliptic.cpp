#include "solitonforge/elliptic.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace soliton {

void SolverConfig::validate() const {
  if (sigma < 0 || sigma > 1)
    throw std::invalid_argument("SolverConfig: sigma must lie in [0,1]");
  if (!(eps_reg > 0)) throw std::invalid_argument("SolverConfig: eps_reg > 0 required");
  if (!(tolerance > 0)) throw std::invalid_argument("SolverConfig: tolerance > 0 required");
  if (!(damping > 0 && damping < 1))
    throw std::invalid_argument("SolverConfig: damping must lie in (0,1)");
}

std::string SolveStats::to_json() const {
  nlohmann::json j;
  j["iterations"] = iterations;
  j["final_residual"] = final_residual;
  j["min_hessian_eigenvalue"] = min_hessian_eigenvalue;
  j["converged"] = converged;
  j["boundary_warning"] = boundary_warning;
  return j.dump();
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stencil of one interior unknown. Cross neighbours carry unequal arms when
// the segment to the neighbour crosses the domain boundary; diagonal
// neighbours outside the mask are replaced by the Dirichlet value at the
// boundary crossing.
struct Stencil {
  int i = 0, j = 0, k = 0;
  Vec pos{};
  double hm[3] = {0, 0, 0}, hp[3] = {0, 0, 0};
  int im[3] = {-1, -1, -1}, ip[3] = {-1, -1, -1};  // unknown row or -1
  double bm[3] = {0, 0, 0}, bp[3] = {0, 0, 0};
  // pair order: (0,1), (0,2), (1,2); corner order: ++, +-, -+, --
  int diag[3][4] = {{-1, -1, -1, -1}, {-1, -1, -1, -1}, {-1, -1, -1, -1}};
  double diagv[3][4] = {};
  double diaga[3][4] = {{1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}};  // cut fraction
  std::vector<int> coupled;  // unknown rows this residual depends on
};

struct Workspace {
  GridFunction field;            // grid + mask (interior)
  std::vector<std::size_t> node_of_row;  // flat index per unknown
  std::vector<int> row_of_node;          // -1 if not an unknown
  std::vector<Stencil> stencils;
  int dim = 2;
};

int mirror_index(int i) { return i < 0 ? -1 - i : i; }

double bisect_cut(const ImplicitDomain& dom, const Vec& inside, const Vec& outside,
                  Vec* crossing) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 50; ++it) {
    double mid = 0.5 * (lo + hi);
    Vec x;
    for (int d = 0; d < 3; ++d) x[d] = inside[d] + mid * (outside[d] - inside[d]);
    if (dom.level(x) < 0)
      lo = mid;
    else
      hi = mid;
  }
  double a = 0.5 * (lo + hi);
  for (int d = 0; d < 3; ++d) (*crossing)[d] = inside[d] + a * (outside[d] - inside[d]);
  return a;
}

GridFunction make_grid(const ProblemSpec& spec, int resolution) {
  if (!spec.cell_centered) return build_grid(spec.domain, resolution);

  // offset grid for reflection symmetry at the coordinate axes (first
  // quadrant); nodes sit at (i+1/2) h
  const auto& dom = spec.domain;
  double longest = 0;
  for (int d = 0; d < dom.dim; ++d) longest = std::max(longest, dom.hi[d]);
  double h = longest / (resolution - 1);
  CartesianGrid g;
  g.dim = dom.dim;
  g.spacing = h;
  for (int d = 0; d < dom.dim; ++d) {
    g.origin[d] = 0.5 * h;
    g.counts[d] = static_cast<int>(std::ceil(dom.hi[d] / h)) + 2;
  }
  if (dom.dim == 2) g.counts[2] = 1;
  g.validate();
  GridFunction f(g);
  for (int k = 0; k < g.counts[2]; ++k)
    for (int j = 0; j < g.counts[1]; ++j)
      for (int i = 0; i < g.counts[0]; ++i)
        f.mask[g.index(i, j, k)] = dom.contains(g.node(i, j, k)) ? 1 : 0;
  return f;
}

Workspace build_workspace(const ProblemSpec& spec, int resolution) {
  Workspace ws;
  ws.field = make_grid(spec, resolution);
  ws.dim = ws.field.grid.dim;
  const auto& g = ws.field.grid;
  const double h = g.spacing;

  ws.row_of_node.assign(g.size(), -1);
  for (int k = 0; k < g.counts[2]; ++k)
    for (int j = 0; j < g.counts[1]; ++j)
      for (int i = 0; i < g.counts[0]; ++i) {
        std::size_t p = g.index(i, j, k);
        if (ws.field.mask[p]) {
          ws.row_of_node[p] = static_cast<int>(ws.node_of_row.size());
          ws.node_of_row.push_back(p);
        }
      }

  auto node_row = [&](int i, int j, int k) -> int {
    if (spec.cell_centered) {
      i = mirror_index(i);
      j = mirror_index(j);
      k = g.dim == 3 ? mirror_index(k) : k;
    }
    if (!g.in_bounds(i, j, k)) return -1;
    return ws.row_of_node[g.index(i, j, k)];
  };

  const int npairs = ws.dim == 3 ? 3 : 1;
  const int pair_axes[3][2] = {{0, 1}, {0, 2}, {1, 2}};

  ws.stencils.resize(ws.node_of_row.size());
  for (std::size_t row = 0; row < ws.node_of_row.size(); ++row) {
    Stencil& st = ws.stencils[row];
    std::size_t p = ws.node_of_row[row];
    st.k = static_cast<int>(p / (g.counts[0] * static_cast<std::size_t>(g.counts[1])));
    std::size_t rem = p - static_cast<std::size_t>(st.k) * g.counts[0] * g.counts[1];
    st.j = static_cast<int>(rem / g.counts[0]);
    st.i = static_cast<int>(rem % g.counts[0]);
    st.pos = g.node(st.i, st.j, st.k);

    for (int d = 0; d < ws.dim; ++d) {
      for (int sgn : {+1, -1}) {
        int ni = st.i + (d == 0 ? sgn : 0);
        int nj = st.j + (d == 1 ? sgn : 0);
        int nk = st.k + (d == 2 ? sgn : 0);
        int nrow = node_row(ni, nj, nk);
        double arm = h, bc = 0;
        if (nrow < 0) {
          Vec outside = st.pos;
          outside[d] += sgn * h;
          Vec cut;
          double a = bisect_cut(spec.domain, st.pos, outside, &cut);
          arm = std::max(a, 1e-6) * h;
          bc = spec.boundary(cut);
        }
        if (sgn > 0) {
          st.ip[d] = nrow;
          st.hp[d] = arm;
          st.bp[d] = bc;
        } else {
          st.im[d] = nrow;
          st.hm[d] = arm;
          st.bm[d] = bc;
        }
      }
    }

    for (int pr = 0; pr < npairs; ++pr) {
      int d1 = pair_axes[pr][0], d2 = pair_axes[pr][1];
      const int signs[4][2] = {{+1, +1}, {+1, -1}, {-1, +1}, {-1, -1}};
      for (int c = 0; c < 4; ++c) {
        int ni = st.i + (d1 == 0 ? signs[c][0] : (d2 == 0 ? signs[c][1] : 0));
        int nj = st.j + (d1 == 1 ? signs[c][0] : (d2 == 1 ? signs[c][1] : 0));
        int nk = st.k + (d1 == 2 ? signs[c][0] : (d2 == 2 ? signs[c][1] : 0));
        int nrow = node_row(ni, nj, nk);
        st.diag[pr][c] = nrow;
        if (nrow < 0) {
          Vec outside = st.pos;
          outside[d1] += signs[c][0] * h;
          outside[d2] += signs[c][1] * h;
          Vec cut;
          double a = bisect_cut(spec.domain, st.pos, outside, &cut);
          st.diag[pr][c] = -1;
          st.diagv[pr][c] = spec.boundary(cut);
          st.diaga[pr][c] = std::max(a, 0.2);
        }
      }
    }

    st.coupled.push_back(static_cast<int>(row));
    auto add = [&](int r) {
      if (r >= 0 && std::find(st.coupled.begin(), st.coupled.end(), r) == st.coupled.end())
        st.coupled.push_back(r);
    };
    for (int d = 0; d < ws.dim; ++d) {
      add(st.im[d]);
      add(st.ip[d]);
    }
    for (int pr = 0; pr < npairs; ++pr)
      for (int c = 0; c < 4; ++c) add(st.diag[pr][c]);
  }
  return ws;
}

struct Derivs {
  double grad[3] = {0, 0, 0};
  double sec[3] = {0, 0, 0};
  double mixed[3] = {0, 0, 0};  // pairs (0,1), (0,2), (1,2)
};

Derivs local_derivs(const Workspace& ws, const Stencil& st,
                    const Eigen::VectorXd& x, int row) {
  Derivs d;
  const double v0 = x[row];
  const double h = ws.field.grid.spacing;
  for (int dd = 0; dd < ws.dim; ++dd) {
    double vm = st.im[dd] >= 0 ? x[st.im[dd]] : st.bm[dd];
    double vp = st.ip[dd] >= 0 ? x[st.ip[dd]] : st.bp[dd];
    double a = st.hm[dd], b = st.hp[dd];
    d.grad[dd] = (a / (b * (a + b))) * vp - ((a - b) / (a * b)) * v0 -
                 (b / (a * (a + b))) * vm;
    d.sec[dd] = 2.0 * (vm / (a * (a + b)) - v0 / (a * b) + vp / (b * (a + b)));
  }
  const int npairs = ws.dim == 3 ? 3 : 1;
  for (int pr = 0; pr < npairs; ++pr) {
    auto dv = [&](int c) {
      // cut corners: extend the boundary value linearly to the full corner so
      // the equal-arm mixed difference stays consistent
      if (st.diag[pr][c] >= 0) return x[st.diag[pr][c]];
      return v0 + (st.diagv[pr][c] - v0) / st.diaga[pr][c];
    };
    d.mixed[pr] = (dv(0) - dv(1) - dv(2) + dv(3)) / (4.0 * h * h);
  }
  return d;
}

double residual_row(const ProblemSpec& spec, const Workspace& ws,
                    const Eigen::VectorXd& x, int row) {
  const Stencil& st = ws.stencils[row];
  Derivs d = local_derivs(ws, st, x, row);
  const int n = ws.dim;

  switch (spec.kind) {
    case OperatorKind::SigmaOperator:
    case OperatorKind::LogTransformed: {
      double s = spec.kind == OperatorKind::LogTransformed
                     ? spec.eps_reg
                     : std::max(spec.sigma, spec.eps_reg);
      double g2 = 0;
      for (int dd = 0; dd < n; ++dd) g2 += d.grad[dd] * d.grad[dd];
      double denom = s + g2;
      double lap = 0;
      for (int dd = 0; dd < n; ++dd)
        lap += (1.0 - d.grad[dd] * d.grad[dd] / denom) * d.sec[dd];
      double cross = 0;
      const int pair_axes[3][2] = {{0, 1}, {0, 2}, {1, 2}};
      const int npairs = n == 3 ? 3 : 1;
      for (int pr = 0; pr < npairs; ++pr)
        cross += 2.0 * d.grad[pair_axes[pr][0]] * d.grad[pair_axes[pr][1]] *
                 d.mixed[pr] / denom;
      double rhs = spec.kind == OperatorKind::LogTransformed ? std::exp(x[row]) : 1.0;
      return lap - cross - rhs;
    }
    case OperatorKind::ReducedProduct: {
      // coordinates (s, tau) = (|x_hat|, |x_tilde|), ambient n
      const int na = spec.reduced_ambient_n;
      double gs = d.grad[0], gt = d.grad[1];
      double s_coord = st.pos[0], t_coord = st.pos[1];
      double g2 = gs * gs + gt * gt;
      double denom = spec.eps_reg + g2;
      double lap = d.sec[0] + d.sec[1] + (na - 3) * gs / s_coord + gt / t_coord;
      double grad_term =
          (gs * gs * d.sec[0] + 2 * gs * gt * d.mixed[0] + gt * gt * d.sec[1]) / denom;
      return lap - grad_term - 1.0;
    }
    case OperatorKind::DualMongeAmpere: {
      double y1 = st.pos[0], y2 = st.pos[1];
      double w = 1.0 + y1 * y1 + y2 * y2;
      double a11 = 1.0 - y1 * y1 / w;
      double a22 = 1.0 - y2 * y2 / w;
      double a12 = -y1 * y2 / w;
      double det = d.sec[0] * d.sec[1] - d.mixed[0] * d.mixed[0];
      double trace = a11 * d.sec[1] + a22 * d.sec[0] - 2.0 * a12 * d.mixed[0];
      return det - trace;
    }
  }
  return kNaN;
}

double min_hessian_eig(const Workspace& ws, const Eigen::VectorXd& x) {
  double worst = std::numeric_limits<double>::infinity();
  const int npairs = ws.dim == 3 ? 3 : 1;
  for (std::size_t row = 0; row < ws.stencils.size(); ++row) {
    const Stencil& st = ws.stencils[row];
    bool full = true;
    for (int d = 0; d < ws.dim; ++d) full = full && st.im[d] >= 0 && st.ip[d] >= 0;
    for (int pr = 0; pr < npairs; ++pr)
      for (int c = 0; c < 4; ++c) full = full && st.diag[pr][c] >= 0;
    if (!full) continue;
    Derivs d = local_derivs(ws, st, x, static_cast<int>(row));
    if (ws.dim == 2) {
      Eigen::Matrix2d H;
      H << d.sec[0], d.mixed[0], d.mixed[0], d.sec[1];
      worst = std::min(worst, Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(H)
                                  .eigenvalues().minCoeff());
    } else {
      Eigen::Matrix3d H;
      H << d.sec[0], d.mixed[0], d.mixed[1],
           d.mixed[0], d.sec[1], d.mixed[2],
           d.mixed[1], d.mixed[2], d.sec[2];
      worst = std::min(worst, Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(H)
                                  .eigenvalues().minCoeff());
    }
  }
  return std::isfinite(worst) ? worst : 0.0;
}

Eigen::VectorXd initial_guess(const ProblemSpec& spec, const Workspace& ws,
                              const GridFunction* warm, const SolverConfig& config) {
  const std::size_t m = ws.node_of_row.size();
  Eigen::VectorXd x(m);
  const auto& dom = spec.domain;
  Vec half{}, center{};
  for (int d = 0; d < ws.dim; ++d) {
    half[d] = 0.5 * (dom.hi[d] - dom.lo[d]);
    center[d] = 0.5 * (dom.hi[d] + dom.lo[d]);
  }
  if (spec.cell_centered) {
    for (int d = 0; d < ws.dim; ++d) {
      half[d] = dom.hi[d];
      center[d] = 0;
    }
  }

  double scale;
  switch (spec.kind) {
    case OperatorKind::ReducedProduct: {
      int na = spec.reduced_ambient_n;
      scale = 1.0 / (2.0 * ((na - 2) / (half[0] * half[0]) + 2.0 / (half[1] * half[1])));
      break;
    }
    case OperatorKind::DualMongeAmpere:
      scale = 0.5 * (half[0] * half[0] + half[1] * half[1]);
      break;
    default: {
      double s = 0;
      for (int d = 0; d < ws.dim; ++d) s += 2.0 / (half[d] * half[d]);
      scale = 1.0 / s;
      break;
    }
  }

  for (std::size_t row = 0; row < m; ++row) {
    const Vec& p = ws.stencils[row].pos;
    double q = -1.0;
    for (int d = 0; d < ws.dim; ++d) {
      double z = (p[d] - center[d]) / half[d];
      q += z * z;
    }
    double v = scale * q;
    if (spec.kind == OperatorKind::LogTransformed)
      v = -std::log(std::max(-v, config.tolerance));
    if (warm) {
      double w = warm->interpolate(p);
      if (std::isfinite(w)) v = w;
    }
    x[row] = v;
  }
  return x;
}

// Linear extension of the Dirichlet data onto the first exterior ring, so
// contouring near the boundary interpolates through the cut position.
void fill_boundary_ring(const ProblemSpec& spec, Workspace& ws,
                        const Eigen::VectorXd& x) {
  auto& f = ws.field;
  const auto& g = f.grid;
  for (std::size_t p = 0; p < f.values.size(); ++p)
    f.values[p] = f.mask[p] ? x[ws.row_of_node[p]] : kNaN;

  std::vector<double> acc(f.values.size(), 0.0);
  std::vector<int> cnt(f.values.size(), 0);
  for (std::size_t row = 0; row < ws.stencils.size(); ++row) {
    const Stencil& st = ws.stencils[row];
    for (int d = 0; d < ws.dim; ++d) {
      for (int sgn : {+1, -1}) {
        int nrow = sgn > 0 ? st.ip[d] : st.im[d];
        if (nrow >= 0) continue;
        int ni = st.i + (d == 0 ? sgn : 0);
        int nj = st.j + (d == 1 ? sgn : 0);
        int nk = st.k + (d == 2 ? sgn : 0);
        if (spec.cell_centered && (ni < 0 || nj < 0 || nk < 0)) continue;
        if (!g.in_bounds(ni, nj, nk)) continue;
        double arm = sgn > 0 ? st.hp[d] : st.hm[d];
        double bc = sgn > 0 ? st.bp[d] : st.bm[d];
        double alpha = std::max(arm / g.spacing, 0.25);
        double v = x[row] + (bc - x[row]) / alpha;
        std::size_t q = g.index(ni, nj, nk);
        acc[q] += v;
        cnt[q] += 1;
      }
    }
  }
  for (std::size_t q = 0; q < acc.size(); ++q)
    if (cnt[q] > 0 && !f.mask[q]) f.values[q] = acc[q] / cnt[q];
}

}  // namespace

DirichletResult newton_solve(const ProblemSpec& spec, const SolverConfig& config,
                             int resolution, const GridFunction* warm_start) {
  config.validate();
  Workspace ws = build_workspace(spec, resolution);
  const std::size_t m = ws.node_of_row.size();
  if (m == 0) throw std::invalid_argument("newton_solve: empty interior");

  Eigen::VectorXd x = initial_guess(spec, ws, warm_start, config);

  auto assemble_residual = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd r(m);
    for (std::size_t row = 0; row < m; ++row)
      r[row] = residual_row(spec, ws, v, static_cast<int>(row));
    return r;
  };

  SolveStats stats;
  stats.min_hessian_eigenvalue = std::numeric_limits<double>::infinity();
  Eigen::VectorXd r = assemble_residual(x);
  double rnorm = r.lpNorm<Eigen::Infinity>();
  stats.min_hessian_eigenvalue = min_hessian_eig(ws, x);

  const double lambda_min = std::ldexp(1.0, -20);
  int projections = 0;

  for (int iter = 0; iter < config.max_iterations && rnorm > config.tolerance; ++iter) {
    stats.iterations = iter + 1;

    // per-row finite-difference Jacobian over the compact stencil
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(m * (ws.dim == 3 ? 19 : 9));
    Eigen::VectorXd xp = x;
    for (std::size_t row = 0; row < m; ++row) {
      const Stencil& st = ws.stencils[row];
      double base = r[row];
      for (int col : st.coupled) {
        double eps = 1e-7 * (1.0 + std::abs(x[col]));
        double saved = xp[col];
        xp[col] = saved + eps;
        double pert = residual_row(spec, ws, xp, static_cast<int>(row));
        xp[col] = saved;
        trips.emplace_back(static_cast<int>(row), col, (pert - base) / eps);
      }
    }
    Eigen::SparseMatrix<double> J(m, m);
    J.setFromTriplets(trips.begin(), trips.end());

    // 2-D: direct factorization; 3-D: inexact Newton step via preconditioned
    // BiCGSTAB (an exact 3-D factorization is bandwidth-bound and dominates)
    Eigen::VectorXd delta;
    if (ws.dim == 2) {
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
      if (lu.info() != Eigen::Success) break;
      delta = lu.solve(-r);
    } else {
      Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> it;  // Jacobi-preconditioned
      it.setTolerance(1e-8);
      it.setMaxIterations(2000);
      it.compute(J);
      delta = it.solve(-r);
      if (it.info() != Eigen::Success || !delta.allFinite()) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
        if (lu.info() != Eigen::Success) break;
        delta = lu.solve(-r);
      }
    }

    // backtracking line search on the residual max-norm
    double lambda = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new, r_new;
    double rnorm_new = rnorm;
    while (lambda >= lambda_min) {
      x_new = x + lambda * delta;
      r_new = assemble_residual(x_new);
      rnorm_new = r_new.lpNorm<Eigen::Infinity>();
      if (std::isfinite(rnorm_new) && rnorm_new < (1.0 - 1e-4 * lambda) * rnorm) {
        accepted = true;
        break;
      }
      lambda *= config.damping;
    }
    if (!accepted) break;

    x = x_new;
    r = r_new;
    rnorm = rnorm_new;

    double he = min_hessian_eig(ws, x);
    if (spec.kind == OperatorKind::DualMongeAmpere && he < 1e-8 && projections < 5) {
      // convexity floor: lift by a paraboloid and let Newton re-balance
      double c = 2.0 * (1e-8 - he);
      for (std::size_t row = 0; row < m; ++row) {
        const Vec& p = ws.stencils[row].pos;
        x[row] += 0.5 * c * (p[0] * p[0] + p[1] * p[1]);
      }
      r = assemble_residual(x);
      rnorm = r.lpNorm<Eigen::Infinity>();
      he = min_hessian_eig(ws, x);
      ++projections;
    }
    stats.min_hessian_eigenvalue = std::min(stats.min_hessian_eigenvalue, he);
  }

  stats.final_residual = rnorm;
  stats.converged = rnorm <= config.tolerance;
  if (!std::isfinite(stats.min_hessian_eigenvalue)) stats.min_hessian_eigenvalue = 0;

  if (!stats.converged && spec.kind == OperatorKind::LogTransformed) {
    // boundary layer may be unresolved: re-check away from a 3-node collar
    double interior_norm = 0;
    for (std::size_t row = 0; row < m; ++row) {
      const Stencil& st = ws.stencils[row];
      // collar = any cut arm in the stencil
      bool collar = false;
      for (int d = 0; d < ws.dim; ++d)
        collar = collar || st.im[d] < 0 || st.ip[d] < 0;
      if (!collar) interior_norm = std::max(interior_norm, std::abs(r[row]));
    }
    if (interior_norm <= config.tolerance) {
      stats.converged = true;
      stats.boundary_warning = true;
    }
  }

  fill_boundary_ring(spec, ws, x);
  return {std::move(ws.field), stats};
}

GridFunction operator_residual(const GridFunction& u, double sigma, double eps_reg) {
  auto pair = operator_residual_decomposed(u, sigma, eps_reg);
  GridFunction r = pair.first;
  for (std::size_t p = 0; p < r.values.size(); ++p)
    if (r.mask[p]) r.values[p] += pair.second.values[p] - 1.0;
  return r;
}

std::pair<GridFunction, GridFunction> operator_residual_decomposed(
    const GridFunction& u, double sigma, double eps_reg) {
  const auto& g = u.grid;
  const double h = g.spacing, h2 = h * h;
  const int n = g.dim;
  GridFunction level_part(g), sigma_part(g);
  for (auto& v : level_part.values) v = kNaN;
  for (auto& v : sigma_part.values) v = kNaN;

  double s = std::max(sigma, eps_reg);
  for (int k = 0; k < g.counts[2]; ++k)
    for (int j = 0; j < g.counts[1]; ++j)
      for (int i = 0; i < g.counts[0]; ++i) {
        if (!u.has_interior_margin(i, j, k)) continue;
        auto v = [&](int di, int dj, int dk) { return u.at(i + di, j + dj, k + dk); };
        double grad[3] = {(v(1, 0, 0) - v(-1, 0, 0)) / (2 * h),
                          (v(0, 1, 0) - v(0, -1, 0)) / (2 * h),
                          n == 3 ? (v(0, 0, 1) - v(0, 0, -1)) / (2 * h) : 0.0};
        double sec[3] = {(v(1, 0, 0) - 2 * v(0, 0, 0) + v(-1, 0, 0)) / h2,
                         (v(0, 1, 0) - 2 * v(0, 0, 0) + v(0, -1, 0)) / h2,
                         n == 3 ? (v(0, 0, 1) - 2 * v(0, 0, 0) + v(0, 0, -1)) / h2 : 0.0};
        double m01 = (v(1, 1, 0) - v(1, -1, 0) - v(-1, 1, 0) + v(-1, -1, 0)) / (4 * h2);
        double m02 = 0, m12 = 0;
        if (n == 3) {
          m02 = (v(1, 0, 1) - v(1, 0, -1) - v(-1, 0, 1) + v(-1, 0, -1)) / (4 * h2);
          m12 = (v(0, 1, 1) - v(0, 1, -1) - v(0, -1, 1) + v(0, -1, -1)) / (4 * h2);
        }
        double g2 = grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2];
        double lap = sec[0] + sec[1] + sec[2];
        double ugg_num = grad[0] * grad[0] * sec[0] + grad[1] * grad[1] * sec[1] +
                         grad[2] * grad[2] * sec[2] + 2 * grad[0] * grad[1] * m01 +
                         2 * grad[0] * grad[2] * m02 + 2 * grad[1] * grad[2] * m12;
        double ugg = ugg_num / std::max(g2, eps_reg);  // u_gamma_gamma
        std::size_t p = g.index(i, j, k);
        level_part.values[p] = lap - ugg;           // kappa * u_gamma
        sigma_part.values[p] = s * ugg / (s + g2);  // sigma term of (the split)
        level_part.mask[p] = sigma_part.mask[p] = 1;
      }
  return {std::move(level_part), std::move(sigma_part)};
}

DirichletResult solve_dirichlet(const EllipsoidDomain& domain,
                                const SolverConfig& config, double boundary_value,
                                int resolution, const GridFunction* warm_start) {
  domain.validate();
  ProblemSpec spec;
  spec.domain = ImplicitDomain::from(domain);
  spec.kind = OperatorKind::SigmaOperator;
  spec.sigma = config.sigma;
  spec.eps_reg = config.eps_reg;
  spec.boundary = [boundary_value](const Vec&) { return boundary_value; };
  return newton_solve(spec, config, resolution, warm_start);
}

DirichletResult solve_dirichlet(const ImplicitDomain& domain,
                                const SolverConfig& config,
                                const std::function<double(const Vec&)>& boundary_value,
                                int resolution, const GridFunction* warm_start) {
  ProblemSpec spec;
  spec.domain = domain;
  spec.kind = OperatorKind::SigmaOperator;
  spec.sigma = config.sigma;
  spec.eps_reg = config.eps_reg;
  spec.boundary = boundary_value;
  return newton_solve(spec, config, resolution, warm_start);
}

DirichletResult solve_log_transformed(const EllipsoidDomain& domain,
                                      const SolverConfig& config, int resolution) {
  domain.validate();
  if (config.sigma > config.eps_reg)
    throw std::invalid_argument("solve_log_transformed: sigma = 0 mode only");
  double psi_max = -std::log(config.tolerance);
  ProblemSpec spec;
  spec.domain = ImplicitDomain::from(domain);
  spec.kind = OperatorKind::LogTransformed;
  spec.eps_reg = config.eps_reg;
  spec.boundary = [psi_max](const Vec&) { return psi_max; };
  return newton_solve(spec, config, resolution);
}

GridFunction recover_from_log(const GridFunction& psi) {
  GridFunction u = psi;
  for (std::size_t p = 0; p < u.values.size(); ++p)
    if (std::isfinite(u.values[p])) u.values[p] = -std::exp(-u.values[p]);
  return u;
}

std::vector<DirichletResult> sigma_continuation(const EllipsoidDomain& domain,
                                                const std::vector<double>& sigma_list,
                                                SolverConfig config, int resolution) {
  if (sigma_list.empty())
    throw std::invalid_argument("sigma_continuation: empty sigma list");
  for (std::size_t i = 1; i < sigma_list.size(); ++i)
    if (sigma_list[i] > sigma_list[i - 1])
      throw std::invalid_argument("sigma_continuation: list must be descending");
  if (sigma_list.back() < 0)
    throw std::invalid_argument("sigma_continuation: sigma must be >= 0");

  std::vector<DirichletResult> out;
  const GridFunction* warm = nullptr;
  for (double s : sigma_list) {
    config.sigma = s;
    auto res = solve_dirichlet(domain, config, 0.0, resolution, warm);
    bool ok = res.stats.converged;
    out.push_back(std::move(res));
    warm = &out.back().u;
    if (!ok) break;  // abort with partial results
  }
  return out;
}

}  // namespace soliton
