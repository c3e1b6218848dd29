#include "solitonforge/convexity.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace soliton {

ConvexityReport convexity_check(const GridFunction& u, double tol) {
  const auto& g = u.grid;
  const double h2 = g.spacing * g.spacing;
  ConvexityReport rep;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();

  const int n = g.dim;
  Eigen::Matrix3d H;
  bool any = false;
  for (int k = 0; k < g.counts[2]; ++k)
    for (int j = 0; j < g.counts[1]; ++j)
      for (int i = 0; i < g.counts[0]; ++i) {
        if (!u.has_interior_margin(i, j, k)) continue;
        auto v = [&](int di, int dj, int dk) { return u.at(i + di, j + dj, k + dk); };
        H.setZero();
        H(0, 0) = (v(1, 0, 0) - 2 * v(0, 0, 0) + v(-1, 0, 0)) / h2;
        H(1, 1) = (v(0, 1, 0) - 2 * v(0, 0, 0) + v(0, -1, 0)) / h2;
        H(0, 1) = H(1, 0) =
            (v(1, 1, 0) - v(1, -1, 0) - v(-1, 1, 0) + v(-1, -1, 0)) / (4 * h2);
        if (n == 3) {
          H(2, 2) = (v(0, 0, 1) - 2 * v(0, 0, 0) + v(0, 0, -1)) / h2;
          H(0, 2) = H(2, 0) =
              (v(1, 0, 1) - v(1, 0, -1) - v(-1, 0, 1) + v(-1, 0, -1)) / (4 * h2);
          H(1, 2) = H(2, 1) =
              (v(0, 1, 1) - v(0, 1, -1) - v(0, -1, 1) + v(0, -1, -1)) / (4 * h2);
        }
        double lmin;
        if (n == 2) {
          Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(H.topLeftCorner<2, 2>());
          lmin = es.eigenvalues().minCoeff();
        } else {
          Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(H);
          lmin = es.eigenvalues().minCoeff();
        }
        any = true;
        rep.min_eigenvalue = std::min(rep.min_eigenvalue, lmin);
        if (lmin < -tol) rep.violating_nodes.push_back({i, j, k});
      }
  if (!any) rep.min_eigenvalue = 0.0;
  rep.pass = rep.min_eigenvalue >= -tol;
  return rep;
}

}  // namespace soliton
