#pragma once

#include <array>
#include <string>
#include <vector>

#include "solitonforge/elliptic.hpp"
#include "solitonforge/grid.hpp"

namespace soliton {

// Discrete Legendre conjugate u*(y) = sup_x {x.y - u(x)} together with the
// gradient-range hull of the primal and a copy of the primal for round trips.
struct DualField {
  GridFunction dual;                                // u* on its own mask
  GridFunction primal;                              // source field (copy)
  bool has_primal = false;
  SolveStats stats;                                  // filled by solve_dual_dirichlet
  std::vector<std::array<double, 2>> gradient_hull;  // CCW polygon, 2-D only
};

// Exhaustive supremum over the primal mask at every dual node. The dual mask
// keeps nodes inside the gradient-range hull shrunk by one dual spacing, so
// the supremum is never attained at the edge of the primal mask.
DualField legendre_transform(const GridFunction& u, const CartesianGrid& dual_grid);

/// Convenience: dual grid = bounding box of the gradient range plus one
// spacing of margin, `resolution` nodes across the longest axis.
DualField legendre_transform(const GridFunction& u, int resolution);

// e_k(lambda) via incremental expansion of prod_i (t + lambda_i).
double elementary_symmetric(const std::vector<double>& lambda, int k);

// det D^2 u* - sum_ij (delta_ij - y_i y_j/(sigma+|y|^2)) F^ij[u*] at nodes
// with a one-node margin; 2-D only. Nodes where D^2 u* is not positive
// definite are unmasked (residual undefined).
GridFunction dual_equation_residual(const DualField& dual, double sigma);

// Support-function samples on the lower-hemisphere chart p = (x,-1)/sqrt(1+|x|^2),
// x on a uniform square chart grid. chart_dim = 1 stores a single row.
struct SupportSamples {
  int chart_dim = 2;
  double x_min = 0.0;
  double step = 0.0;
  std::array<int, 2> counts{1, 1};  // counts[1] == 1 when chart_dim == 1
  std::vector<double> w;            // row-major, first chart axis fastest

  std::array<double, 2> chart_point(int i, int j = 0) const {
    return {x_min + step * i, chart_dim == 2 ? x_min + step * j : 0.0};
  }
  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(j) * counts[0] + i;
  }

  void save_csv(const std::string& path) const;  // columns x1, x2, w
  static SupportSamples load_csv(const std::string& path);
};

// w(p) = sup {p.(x, u(x))} over the mask, sampled on a chart grid with about
// `directions` nodes (at least 8), clipped to |x| <= 10 and to the gradient
// range of u. Requires a 2-D primal grid.
SupportSamples support_function(const GridFunction& u, int directions);

// Per-sample residual F_m/F_{m-1}(principal radii) - sqrt(1+|x|^2), where the
// radii are the eigenvalues of the restricted Hessian grad^2 w + w I computed
// on the chart (m = chart_dim). NaN at chart-boundary samples, where
// F_{m-1} <= 0 (degenerate), or beyond |x| = 10.
std::vector<double> hessian_quotient_residual(const SupportSamples& w);

// Theorem-5.2 style Dirichlet solve of the dual equation (sigma = 1 weights)
// on a 2-D ellipse, u* = phi on the boundary.
DualField solve_dual_dirichlet(const EllipsoidDomain& domain,
                               const std::function<double(const Vec&)>& phi,
                               double tol, int resolution);

}  // namespace soliton
