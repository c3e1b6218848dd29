#pragma once

#include <Eigen/Dense>
#include <vector>

#include "solitonforge/grid.hpp"

namespace soliton {

// Minimum-volume (Loewner-John) enclosing ellipsoid:
// { x : (x-c)^T A (x-c) <= 1 }.
struct MinimumEllipsoid {
  int dim = 2;
  Eigen::VectorXd center;
  Eigen::MatrixXd shape;  // SPD matrix A

  // semi-axes sorted descending, with the matching orientation columns
  Eigen::VectorXd semi_axes() const;
  Eigen::MatrixXd orientation() const;
  double volume() const;
  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const;
};

// Khachiyan multiplicative-weights iteration, relative tolerance 1e-6.
// Requires >= dim+1 affinely independent points.
MinimumEllipsoid minimum_ellipsoid(const std::vector<Eigen::VectorXd>& points,
                                   double tol = 1e-6);

MinimumEllipsoid minimum_ellipsoid(const std::vector<Vec>& points, int dim,
                                   double tol = 1e-6);

// Ratio of largest to smallest semi-axis.
double ellipse_axis_ratio(const MinimumEllipsoid& e);

}  // namespace soliton
