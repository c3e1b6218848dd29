#pragma once

#include <vector>

#include "solitonforge/grid.hpp"

namespace soliton {

// Grim reaper u(x1) = log sec x1 on |x1| < pi/2, with analytic derivatives.
double grim_reaper(double x1);
double grim_reaper_d1(double x1);   // tan x1
double grim_reaper_d2(double x1);   // sec^2 x1

// Canonical blow-down profile eta_k(x) = sum_{i<=k} x_i^2 / (2(k-1)).
double eta_profile(const Vec& x, int k);

/// Exact radial solution of the sigma=0 Dirichlet problem on B_R:
// (|x|^2 - R^2) / (2(n-1)), vanishing on the boundary.
double radial_bowl_sigma0(const Vec& x, int n, double R);

/// Rotationally symmetric translating soliton profile: solution of
// u'' / (1 + u'^2) + (n-1) u' / r = 1 with u(0) = u'(0) = 0.
struct BowlProfile {
  int n = 2;
  double step = 0.0;
  std::vector<double> r;   // sample radii, uniform
  std::vector<double> u;   // values
  std::vector<double> du;  // first derivative

  double value(double radius) const;       // linear interpolation
  double derivative(double radius) const;
  double max_radius() const { return r.empty() ? 0.0 : r.back(); }
};

// RK4 integration of the radial ODE; the singular point at r=0 is started
// from the series u(r) = r^2/(2n) + r^4/(4 n^3 (n+2)) (two terms).
BowlProfile bowl_profile(int n, double r_max, double step);

}  // namespace soliton
