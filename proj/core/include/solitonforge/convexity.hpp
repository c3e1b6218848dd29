#pragma once

#include <vector>

#include "solitonforge/grid.hpp"

namespace soliton {

struct ConvexityReport {
  double min_eigenvalue = 0.0;
  std::vector<std::array<int, 3>> violating_nodes;  // eigenvalue < -tol
  bool pass = false;
};

// Minimum eigenvalue of the central-difference Hessian over masked nodes with
// a one-node interior margin; pass iff >= -tol.
ConvexityReport convexity_check(const GridFunction& u, double tol);

}  // namespace soliton
