#include "solitonforge/min_ellipsoid.hpp"

#include <cmath>
#include <stdexcept>

namespace soliton {

Eigen::VectorXd MinimumEllipsoid::semi_axes() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(shape);
  Eigen::VectorXd ev = es.eigenvalues();
  Eigen::VectorXd axes(dim);
  // eigenvalues ascending -> axes descending
  for (int i = 0; i < dim; ++i) axes[i] = 1.0 / std::sqrt(ev[i]);
  return axes;
}

Eigen::MatrixXd MinimumEllipsoid::orientation() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(shape);
  return es.eigenvectors();
}

double MinimumEllipsoid::volume() const {
  double unit = dim == 2 ? M_PI : 4.0 * M_PI / 3.0;
  return unit / std::sqrt(shape.determinant());
}

bool MinimumEllipsoid::contains(const Eigen::VectorXd& x, double tol) const {
  Eigen::VectorXd d = x - center;
  return d.dot(shape * d) <= 1.0 + tol;
}

MinimumEllipsoid minimum_ellipsoid(const std::vector<Eigen::VectorXd>& points,
                                   double tol) {
  if (points.empty()) throw std::invalid_argument("minimum_ellipsoid: no points");
  const int d = static_cast<int>(points.front().size());
  const int m = static_cast<int>(points.size());
  if (m < d + 1)
    throw std::invalid_argument("minimum_ellipsoid: need >= dim+1 points");

  // lifted points Q = [x; 1]
  Eigen::MatrixXd Q(d + 1, m);
  for (int i = 0; i < m; ++i) {
    Q.col(i).head(d) = points[i];
    Q(d, i) = 1.0;
  }

  Eigen::VectorXd u = Eigen::VectorXd::Constant(m, 1.0 / m);
  const int max_iter = 10000;
  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::MatrixXd X = Q * u.asDiagonal() * Q.transpose();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(X);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw std::invalid_argument("minimum_ellipsoid: rank-deficient input");
    // M_i = q_i^T X^{-1} q_i
    Eigen::MatrixXd Sol = ldlt.solve(Q);
    Eigen::VectorXd M = (Q.array() * Sol.array()).colwise().sum();
    int jmax;
    double maxM = M.maxCoeff(&jmax);
    double step = (maxM - (d + 1.0)) / ((d + 1.0) * (maxM - 1.0));
    if (maxM <= (1.0 + tol) * (d + 1.0)) break;
    u *= (1.0 - step);
    u[jmax] += step;
  }

  Eigen::VectorXd c(d);
  c.setZero();
  for (int i = 0; i < m; ++i) c += u[i] * points[i];
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < m; ++i)
    S += u[i] * (points[i] - c) * (points[i] - c).transpose();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw std::invalid_argument("minimum_ellipsoid: degenerate point set");
  Eigen::MatrixXd A = ldlt.solve(Eigen::MatrixXd::Identity(d, d)) / d;

  MinimumEllipsoid e;
  e.dim = d;
  e.center = c;
  e.shape = 0.5 * (A + A.transpose());
  return e;
}

MinimumEllipsoid minimum_ellipsoid(const std::vector<Vec>& points, int dim,
                                   double tol) {
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(points.size());
  for (const Vec& p : points) {
    Eigen::VectorXd v(dim);
    for (int k = 0; k < dim; ++k) v[k] = p[k];
    pts.push_back(std::move(v));
  }
  return minimum_ellipsoid(pts, tol);
}

double ellipse_axis_ratio(const MinimumEllipsoid& e) {
  Eigen::VectorXd ax = e.semi_axes();
  return ax.maxCoeff() / ax.minCoeff();
}

}  // namespace soliton
