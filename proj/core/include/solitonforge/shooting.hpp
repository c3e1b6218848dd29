#pragma once

#include <string>
#include <vector>

#include "solitonforge/elliptic.hpp"
#include "solitonforge/grid.hpp"

namespace soliton {

enum class ShootingMode { PrimalSigmaZero, DualSigmaOne };

// Two-parameter shooting state: domain semi-axes (r, t) tuned so the solution
// depth M = -inf u hits K and the level set {u = -M+1} has aspect theta.
struct ShootingResult {
  double r = 0.0, t = 0.0;
  double depth = 0.0;   // achieved M
  double aspect = 0.0;  // achieved sup|x'| / sup x_n at level -M+1
  double target_depth = 0.0;
  double target_aspect = 0.0;
  double depth_residual = 0.0;
  double aspect_residual = 0.0;
  bool converged = false;
  ShootingMode mode = ShootingMode::PrimalSigmaZero;
  GridFunction solution;           // primal field (dual mode: back-transform)
  std::vector<std::string> trace;  // bisection log, one line per probe

  // manifest; the GridFunction is referenced by the given relative path
  std::string to_json(const std::string& solution_path) const;
};

struct ShootingTolerances {
  double depth_tol = 1e-2;
  double aspect_tol = 5e-2;
  int resolution = 97;
  int max_probes = 200;
};

// M = -min u and the aspect of {u = -M+1}; requires min u < -1 and an
// untruncated level set.
std::pair<double, double> level_max_and_aspect(const GridFunction& u);

// Nested root find: inner bisection on t for M = K (M is monotone increasing
// in t), outer bisection on r for aspect = theta. Throws on bracketing
// failure or detected non-monotonicity, with the probe trace in the message.
ShootingResult shoot_parameters(int n, double K, double theta, ShootingMode mode,
                                const ShootingTolerances& tol = {});

struct FamilyEntry {
  double k = 0.0;
  GridFunction w;  // u_{r_k, t_k} + k, shifted so min w = 0
  EllipsoidDomain domain;
  bool converged = false;
};

struct SolitonFamily {
  std::vector<FamilyEntry> entries;  // ordered by increasing k
  double theta = 0.0;
  ShootingMode mode = ShootingMode::PrimalSigmaZero;
  bool complete = false;  // every requested K shot successfully

  std::string to_json(const std::vector<std::string>& entry_paths) const;
};

SolitonFamily build_family(int n, double theta, const std::vector<double>& K_list,
                           ShootingMode mode, const ShootingTolerances& tol = {});

// n >= 4 product construction in the reduced coordinates (s, tau) =
// (|x_hat|, |x_tilde|), x_hat in R^{n-2}, x_tilde in R^2. Returns the reduced
// 2-D field w(s, tau) = u + K shifted to min 0 on the quarter-ellipse grid.
GridFunction product_construction(int n, double theta, double K,
                                  const ShootingTolerances& tol = {});

// Dual route (n = 2): tune (r, t) on the dual Monge-Ampere solve, then
// Legendre-transform back. depth/aspect report the dual quantities.
ShootingResult dual_construction(int n, double theta, double K,
                                 const ShootingTolerances& tol = {});

}  // namespace soliton
