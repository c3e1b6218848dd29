#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "solitonforge/grid.hpp"

namespace soliton {

struct SolverConfig {
  double sigma = 1.0;        // in [0, 1]
  double eps_reg = 1e-8;     // gradient regularization: sigma_eff = max(sigma, eps_reg)
  double tolerance = 1e-8;   // Newton stop: max-norm of the residual
  int max_iterations = 60;
  double damping = 0.5;      // backtracking factor

  void validate() const;
};

struct SolveStats {
  int iterations = 0;
  double final_residual = 0.0;
  double min_hessian_eigenvalue = 0.0;  // minimum along accepted iterates
  bool converged = false;
  bool boundary_warning = false;  // residual met only away from the boundary collar

  std::string to_json() const;
};

struct DirichletResult {
  GridFunction u;
  SolveStats stats;
};

// Operator families sharing one Newton loop.
enum class OperatorKind {
  SigmaOperator,   // sum (delta_ij - u_i u_j / (s + |Du|^2)) u_ij = 1
  LogTransformed,  // sum (delta_ij - p_i p_j / |Dp|^2) p_ij = e^p
  ReducedProduct,  // radial-radial reduction of the sigma=0 operator, n >= 4
  DualMongeAmpere  // det D^2 v = sum (delta_ij - y_i y_j/(1+|y|^2)) F^ij[v]
};

struct ProblemSpec {
  ImplicitDomain domain;
  OperatorKind kind = OperatorKind::SigmaOperator;
  double sigma = 1.0;
  double eps_reg = 1e-8;
  std::function<double(const Vec&)> boundary;  // Dirichlet data
  int reduced_ambient_n = 0;  // ReducedProduct: ambient dimension n
  bool cell_centered = false; // offset grid with reflection at coordinate axes
};

// Damped Newton with per-row finite-difference Jacobian over the compact
// stencil; boundary cut cells use unequal-arm one-sided differences against
// the Dirichlet data. Returns the best iterate even on non-convergence.
DirichletResult newton_solve(const ProblemSpec& spec, const SolverConfig& config,
                             int resolution, const GridFunction* warm_start = nullptr);

// L_sigma residual on nodes with a one-node interior margin; elsewhere the
// result is unmasked. sigma_eff = max(sigma, eps_reg).
GridFunction operator_residual(const GridFunction& u, double sigma,
                               double eps_reg = 1e-8);

// Decomposition (kappa u_gamma, sigma u_gg / (sigma + u_gamma^2)) whose sum
// equals L_sigma[u] - 1 + 1 at the same nodes.
std::pair<GridFunction, GridFunction> operator_residual_decomposed(
    const GridFunction& u, double sigma, double eps_reg = 1e-8);

DirichletResult solve_dirichlet(const EllipsoidDomain& domain,
                                const SolverConfig& config, double boundary_value,
                                int resolution,
                                const GridFunction* warm_start = nullptr);

DirichletResult solve_dirichlet(const ImplicitDomain& domain,
                                const SolverConfig& config,
                                const std::function<double(const Vec&)>& boundary_value,
                                int resolution,
                                const GridFunction* warm_start = nullptr);

// psi = -log(-u) formulation of the sigma=0 problem, with the boundary value
// capped at psi_max = -log(config.tolerance).
DirichletResult solve_log_transformed(const EllipsoidDomain& domain,
                                      const SolverConfig& config, int resolution);

// u = -exp(-psi) on the psi mask.
GridFunction recover_from_log(const GridFunction& psi);

// Sequential solves with warm starts along a descending sigma list.
std::vector<DirichletResult> sigma_continuation(const EllipsoidDomain& domain,
                                                const std::vector<double>& sigma_list,
                                                SolverConfig config, int resolution);

}  // namespace soliton
