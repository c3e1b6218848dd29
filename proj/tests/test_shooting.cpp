#include <doctest.h>

#include <cmath>

#include <solitonforge/convexity.hpp>
#include <solitonforge/elliptic.hpp>
#include <solitonforge/level_set.hpp>
#include <solitonforge/reference.hpp>
#include <solitonforge/shooting.hpp>

using namespace soliton;

TEST_CASE("level depth and aspect of scaled radial solutions") {
  CartesianGrid g;
  g.dim = 2;
  g.spacing = 5.0 / 128;
  g.origin = vec2(-2.5, -2.5);
  g.counts = {129, 129, 1};
  GridFunction u(g);
  for (int j = 0; j < 129; ++j)
    for (int i = 0; i < 129; ++i) {
      Vec x = g.node(i, j);
      double r2 = x[0] * x[0] + x[1] * x[1];
      u.at(i, j) = r2 - 2.0;  // radial, min -2, zero level at sqrt(2)
      u.mask[g.index(i, j)] = r2 < 4.0 ? 1 : 0;
    }
  auto [M, aspect] = level_max_and_aspect(u);
  CHECK(std::abs(M - 2.0) < 1e-6);
  CHECK(std::abs(aspect - 1.0) < 0.05);
}

TEST_CASE("aspect responds to domain elongation") {
  SolverConfig cfg;
  std::vector<double> ladder{1.0, 0.1, 0.01, 1e-3, 1e-6};
  auto wide = sigma_continuation(EllipsoidDomain{2, 3, 1}, ladder, cfg, 97);
  REQUIRE(wide.back().stats.converged);
  auto [mw, aw] = level_max_and_aspect(wide.back().u);
  CHECK(aw > 1.0);

  auto tall = sigma_continuation(EllipsoidDomain{2, 1, 3}, ladder, cfg, 97);
  REQUIRE(tall.back().stats.converged);
  auto [mt, at] = level_max_and_aspect(tall.back().u);
  CHECK(at < 1.0);
  CHECK(std::abs(mw - mt) < 0.05);  // swapped axes give the same depth
}

TEST_CASE("radial shooting target sits at r = t = sqrt(2(n-1)K)") {
  // K near 1 keeps the probe domains tiny and the solves cheap
  ShootingTolerances tol;
  tol.resolution = 65;
  ShootingResult res =
      shoot_parameters(2, 1.2, 1.0, ShootingMode::PrimalSigmaZero, tol);
  CHECK(res.converged);
  double expect = std::sqrt(2.0 * 1.2);
  CHECK(std::abs(res.r - expect) / expect < 0.15);
  CHECK(std::abs(res.t - expect) / expect < 0.15);
  CHECK(std::abs(res.depth - 1.2) <= tol.depth_tol);
  CHECK(std::abs(res.aspect - 1.0) <= tol.aspect_tol);
}

TEST_CASE("degenerate aspect target fails with a bracketing diagnostic") {
  ShootingTolerances tol;
  tol.resolution = 33;
  tol.max_probes = 60;
  CHECK_THROWS_AS(
      shoot_parameters(2, 2.0, 1e-9, ShootingMode::PrimalSigmaZero, tol),
      std::runtime_error);
}

TEST_CASE("invalid shooting parameters are rejected") {
  ShootingTolerances tol;
  CHECK_THROWS_AS(shoot_parameters(2, 0.5, 1.0, ShootingMode::PrimalSigmaZero, tol),
                  std::invalid_argument);
  CHECK_THROWS_AS(shoot_parameters(5, 2.0, 1.0, ShootingMode::PrimalSigmaZero, tol),
                  std::invalid_argument);
  CHECK_THROWS_AS(product_construction(3, 1.0, 2.0, tol), std::invalid_argument);
  CHECK_THROWS_AS(dual_construction(3, 1.0, 2.0, tol), std::invalid_argument);
}

TEST_CASE("product construction stays below the comparison paraboloid") {
  ShootingTolerances tol;
  tol.resolution = 49;
  GridFunction w = product_construction(4, 2.0, 2.0, tol);
  const auto& g = w.grid;
  REQUIRE(g.dim == 2);
  double depth = w.max_masked() - w.min_masked();
  CHECK(depth > 1.0);
  // reduced coordinates: w(s, t) <= (s^2 + t^2)/2 + tolerance after shifting
  // both to zero at the center (Eq: comparison with |x|^2/2)
  double wmin = w.min_masked();
  for (int j = 0; j < g.counts[1]; ++j)
    for (int i = 0; i < g.counts[0]; ++i) {
      if (!w.masked(i, j)) continue;
      Vec x = g.node(i, j);
      CHECK(w.at(i, j) - wmin <=
            0.5 * (x[0] * x[0] + x[1] * x[1]) + 4 * g.spacing);
    }
}

TEST_CASE("reduced product operator accepts the radial comparison solution") {
  // phi = |x|^2 / 2 solves the reduced sigma=0 equation in every dimension;
  // the theta = 1 construction must therefore stay radial (aspect 1)
  ShootingTolerances tol;
  tol.resolution = 49;
  GridFunction w = product_construction(4, 1.0, 1.5, tol);
  double wmin = w.min_masked();
  // sample symmetric points (s, t) vs (t, s)
  const auto& g = w.grid;
  if (g.counts[0] == g.counts[1]) {
    double asym = 0;
    for (int j = 0; j < g.counts[1]; ++j)
      for (int i = 0; i < g.counts[0]; ++i) {
        if (!w.masked(i, j) || !w.masked(j, i)) continue;
        asym = std::max(asym, std::abs(w.at(i, j) - w.at(j, i)));
      }
    CHECK(asym < 5e-2);
  }
  CHECK(wmin == 0.0);  // construction shifts the minimum to zero
}
