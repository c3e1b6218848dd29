#include "solitonforge/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace soliton {

double grim_reaper(double x1) {
  if (!(std::abs(x1) < M_PI / 2))
    throw std::domain_error("grim_reaper: |x1| must be < pi/2");
  return -std::log(std::cos(x1));
}

double grim_reaper_d1(double x1) {
  if (!(std::abs(x1) < M_PI / 2))
    throw std::domain_error("grim_reaper: |x1| must be < pi/2");
  return std::tan(x1);
}

double grim_reaper_d2(double x1) {
  double t = grim_reaper_d1(x1);
  return 1.0 + t * t;
}

double eta_profile(const Vec& x, int k) {
  if (k < 2) throw std::invalid_argument("eta_profile: k must be >= 2");
  double s = 0;
  for (int i = 0; i < k; ++i) s += x[i] * x[i];
  return s / (2.0 * (k - 1));
}

double radial_bowl_sigma0(const Vec& x, int n, double R) {
  if (n < 2) throw std::invalid_argument("radial_bowl_sigma0: n must be >= 2");
  double r2 = 0;
  for (int d = 0; d < n; ++d) r2 += x[d] * x[d];
  return (r2 - R * R) / (2.0 * (n - 1));
}

double BowlProfile::value(double radius) const {
  double a = std::abs(radius);
  if (a > r.back() + step)
    throw std::out_of_range("BowlProfile: radius beyond sampled range");
  double f = a / step;
  std::size_t i = std::min(static_cast<std::size_t>(f), r.size() - 2);
  double t = f - i;
  return u[i] * (1 - t) + u[i + 1] * t;
}

double BowlProfile::derivative(double radius) const {
  double a = std::abs(radius);
  if (a > r.back() + step)
    throw std::out_of_range("BowlProfile: radius beyond sampled range");
  double f = a / step;
  std::size_t i = std::min(static_cast<std::size_t>(f), r.size() - 2);
  double t = f - i;
  double d = du[i] * (1 - t) + du[i + 1] * t;
  return radius < 0 ? -d : d;
}

BowlProfile bowl_profile(int n, double r_max, double step) {
  if (n < 2) throw std::invalid_argument("bowl_profile: n must be >= 2");
  if (!(step > 0) || step > r_max / 100)
    throw std::invalid_argument("bowl_profile: need 0 < step <= r_max/100");

  BowlProfile prof;
  prof.n = n;
  prof.step = step;

  const double a2 = 1.0 / (2.0 * n);
  const double a4 = 1.0 / (4.0 * n * n * n * (n + 2));
  auto series_u = [&](double r) { return a2 * r * r + a4 * r * r * r * r; };
  auto series_du = [&](double r) { return 2 * a2 * r + 4 * a4 * r * r * r; };

  auto rhs = [n](double r, double p) {
    return (1.0 + p * p) * (1.0 - (n - 1) * p / r);
  };

  std::size_t count = static_cast<std::size_t>(std::ceil(r_max / step)) + 1;
  prof.r.reserve(count);
  prof.u.reserve(count);
  prof.du.reserve(count);

  // series start through r = 10*step
  std::size_t i_switch = 10;
  for (std::size_t i = 0; i <= i_switch && i < count; ++i) {
    double r = i * step;
    prof.r.push_back(r);
    prof.u.push_back(series_u(r));
    prof.du.push_back(series_du(r));
  }

  double r = i_switch * step;
  double uu = series_u(r), p = series_du(r);
  for (std::size_t i = i_switch + 1; i < count; ++i) {
    // The linearization of p' = rhs contracts at rate ~ (n-1) r, so explicit
    // stability needs substeps h <= O(1/r); the output spacing stays `step`.
    int sub = std::max(1, static_cast<int>(std::ceil(step * (r + step))));
    double h = step / sub, u_next = uu, p_next = p, rr = r;
    for (int s = 0; s < sub; ++s) {
      double k1u = p_next, k1p = rhs(rr, p_next);
      double k2u = p_next + 0.5 * h * k1p, k2p = rhs(rr + 0.5 * h, p_next + 0.5 * h * k1p);
      double k3u = p_next + 0.5 * h * k2p, k3p = rhs(rr + 0.5 * h, p_next + 0.5 * h * k2p);
      double k4u = p_next + h * k3p, k4p = rhs(rr + h, p_next + h * k3p);
      u_next += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
      p_next += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
      rr += h;
    }
    if (!std::isfinite(u_next) || !std::isfinite(p_next) || p_next < p)
      throw std::runtime_error("bowl_profile: integration lost convexity (step too large)");
    r += step;
    uu = u_next;
    p = p_next;
    prof.r.push_back(r);
    prof.u.push_back(uu);
    prof.du.push_back(p);
  }
  return prof;
}

}  // namespace soliton
