#pragma once

#include <string>
#include <vector>

#include "solitonforge/grid.hpp"

namespace soliton {

// Convex plane curve in Gauss-map parametrization: w(theta_i) is the support
// function at theta_i = 2 pi i / N. Convexity means discrete w'' + w > 0.
struct SupportCurve {
  int N = 0;
  std::vector<double> w;

  double theta(int i) const { return 2.0 * M_PI * i / N; }
  void validate() const;  // throws unless N >= 8 and w.size() == N
};

SupportCurve make_circle(double radius, int N);
// w(theta) = sqrt(a^2 cos^2 + b^2 sin^2), semi-axes (a, b)
SupportCurve make_ellipse(double a, double b, int N);

// Spectral (trigonometric collocation) periodic derivatives.
std::vector<double> periodic_derivative(const std::vector<double>& f);
std::vector<double> periodic_second_derivative(const std::vector<double>& f);

bool is_convex(const SupportCurve& c);

struct SupportGeometry {
  std::vector<double> curvature;  // kappa = 1/(w'' + w)
  double area = 0.0;              // 1/2 integral of w (w'' + w)
};
SupportGeometry support_geometry(const SupportCurve& c);

struct FlowTrajectory {
  std::vector<double> times;
  std::vector<SupportCurve> curves;
  std::vector<double> areas;
  double extinction_estimate = 0.0;  // |Omega_0| / (2 pi)
  bool aborted = false;              // convexity loss or step underflow

  // trajectory CSV (t, area, delta_t, kprime_energy) plus per-time curve CSVs
  void export_csv(const std::string& prefix) const;
};

// w_t = -1/(w'' + w), explicit midpoint RK2 with the parabolic step bound
// dt <= 0.2 min(w''+w)^2 dtheta^2. Stores output_count states including t=0.
FlowTrajectory csf_run(const SupportCurve& w0, double t_end, double dt0,
                       int output_count = 50);

struct AreaLawReport {
  double slope = 0.0;      // fitted d|Omega|/dt
  double deviation = 0.0;  // |slope + 2 pi| / (2 pi)
  bool pass = false;       // deviation <= 0.5%
};
AreaLawReport area_law_check(const FlowTrajectory& traj);

struct RoundnessReport {
  std::vector<double> times;              // t <= 0.95 T_ext only
  std::vector<SupportCurve> normalized;   // w / sqrt(2 (T_ext - t))
  std::vector<double> delta;              // sup-norm distance to best-fit circle
  double extinction_time = 0.0;           // from the area-law fit
};
RoundnessReport normalize_and_roundness(const FlowTrajectory& traj);

struct DecayReport {
  bool applicable = false;  // false when the curvature is constant (circle)
  double rate = 0.0;        // slope of log integral (kappa')^2 vs tau
  bool pass = false;        // applicable implies rate < 0
  std::vector<double> tau;         // -1/2 log(1 - t/T_ext)
  std::vector<double> log_energy;  // log integral (dkappa/ds)^2 ds, normalized
};
DecayReport gage_hamilton_decay(const FlowTrajectory& traj);

// |Omega_{h, sigma->0}| - |Omega_{h, sigma}| from two Dirichlet solves on the
// same 2-D domain; h must cut a closed level set of both solutions.
double area_deficit(const EllipsoidDomain& domain, double sigma, double h,
                    int resolution);

}  // namespace soliton
