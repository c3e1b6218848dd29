#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "solitonforge/grid.hpp"

namespace soliton {

// Scalar field on R^dim; NaN marks points outside the region of definition.
using FieldFn = std::function<double(const Vec&)>;

// Wraps a GridFunction as a FieldFn (NaN beyond the grid box).
FieldFn field_of(const GridFunction& u);

struct BlowdownField {
  GridFunction u;          // u_h(x) = u(sqrt(h) x) / h on the unit-scale grid
  bool truncated = false;  // source did not cover the requested box
};

// Rescaled field on the box |x|_inf <= box_radius, `resolution` nodes across.
BlowdownField blowdown(const FieldFn& u, int dim, double h, int resolution = 65,
                       double box_radius = 1.0);
BlowdownField blowdown(const GridFunction& u, double h, int resolution = 65,
                       double box_radius = 1.0);

struct BlowdownReport {
  std::vector<double> h_schedule;
  int k = 0;                  // detected rank; 0 when indeterminate
  bool indeterminate = false;
  std::array<std::array<double, 3>, 3> rotation{};  // rows = principal axes,
                                                    // u_h ~ eta_k(rotation * x)
  std::vector<double> errors;     // sup |u_h - eta_k o rotation| on B_1, per h
  std::vector<bool> truncated;    // per h
  std::vector<double> extents;    // sub-level extents along the principal axes

  std::string to_json() const;
};

// Rank detection at the largest h: second moments of {u_h < 1}, directions
// reaching the truncation radius are null, k = dim - #null. Extents within
// 10% of the threshold give the indeterminate branch (no guess).
BlowdownReport classify_profile(const FieldFn& u, int dim,
                                const std::vector<double>& h_schedule,
                                int resolution = 65);
BlowdownReport classify_profile(const GridFunction& u,
                                const std::vector<double>& h_schedule,
                                int resolution = 65);

struct EstimateSample {
  double h = 0.0;        // scale / level the row refers to
  double measured = 0.0;
  double bound = 0.0;    // satisfaction means measured <= bound
};

struct EstimateReport {
  std::string name;
  std::vector<EstimateSample> samples;
  double margin = 0.0;  // min over samples of bound - measured
  double slack = 0.0;   // declared discretization allowance
  bool pass = false;    // margin >= -slack (unless a branch overrides)
  std::string branch;   // "", "strip-consistent", "inconclusive", ...
  std::map<std::string, double> fitted;

  std::string to_json() const;
};

// summary CSV (check, margin, pass), rows ordered by check name
std::string estimate_summary_csv(std::vector<EstimateReport> reports);

// Smallest C with u <= C (1 + |x|^2) per radius in the schedule; pass iff C
// stabilizes. A NaN inside the schedule switches to the strip branch.
EstimateReport growth_fit(const FieldFn& u, int dim,
                          const std::vector<double>& radii);

// a_h * b_h >= (pi/32) h per level (2-D); in 3-D the constant is fitted and
// recorded instead of asserted. Expects min u = 0.
EstimateReport width_product_check(const GridFunction& u,
                                   const std::vector<double>& h_schedule);

// Pinch geometry across a rescaling sweep: delta = dist(0, {u_h = 1}) and the
// reach R of the level set must satisfy R^2 + log delta >= -C for one C.
EstimateReport pinch_width_check(const FieldFn& u, int dim,
                                 const std::vector<double>& h_schedule,
                                 int resolution = 129);

enum class AspectBoundsKind { Primal48, Dual519 };

// Primal48: (delta r_h)^2 / (4(n-1)) <= h <= r_h^2 / (2(n-2)) (upper bound
// n >= 3 only). Dual519: sqrt(h/n) <= r_h <= sqrt(2h). Expects min u = 0.
EstimateReport aspect_bounds_check(const GridFunction& u, AspectBoundsKind kind,
                                   const std::vector<double>& h_schedule, int n);

// Concavity of log(-u) at nodes two deep inside the mask and outside the
// zero-level collar -u < 8 h (1 + |Du|), where the log is too singular to
// difference; pass iff the minimum Hessian eigenvalue of -log(-u) is
// >= -tol * max(scale, 1).
EstimateReport log_concavity_check(const GridFunction& u, double tol);

enum class DeviationMode { OLinear16, TwoThirds313 };

// Growth exponent of u - radial_profile(|x - center|) after sub-node
// centering; OLinear16 passes when the exponent is < 1, TwoThirds313 when it
// is <= 2/3 + 0.15.
EstimateReport radial_deviation(const GridFunction& u, DeviationMode mode,
                                const std::function<double(double)>& radial_profile);

}  // namespace soliton
