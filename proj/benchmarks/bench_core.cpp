#include <benchmark/benchmark.h>

#include <solitonforge/curve_flow.hpp>
#include <solitonforge/elliptic.hpp>
#include <solitonforge/legendre.hpp>

using namespace soliton;

namespace {

GridFunction paraboloid(int res) {
  CartesianGrid g;
  g.dim = 2;
  g.spacing = 2.0 / (res - 1);
  g.origin = vec2(-1, -1);
  g.counts = {res, res, 1};
  GridFunction u(g);
  for (int j = 0; j < res; ++j)
    for (int i = 0; i < res; ++i) {
      Vec x = g.node(i, j);
      u.at(i, j) = 0.5 * (x[0] * x[0] + x[1] * x[1]);
      u.mask[g.index(i, j)] = x[0] * x[0] + x[1] * x[1] < 1.0 ? 1 : 0;
    }
  return u;
}

void BM_OperatorResidual(benchmark::State& state) {
  GridFunction u = paraboloid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(operator_residual(u, 1.0));
}
BENCHMARK(BM_OperatorResidual)->Arg(65)->Arg(129)->Arg(257);

void BM_DirichletSolve(benchmark::State& state) {
  EllipsoidDomain disk{2, 1, 1};
  SolverConfig cfg;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        solve_dirichlet(disk, cfg, 0.0, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_DirichletSolve)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);

void BM_LegendreTransform(benchmark::State& state) {
  GridFunction u = paraboloid(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        legendre_transform(u, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_LegendreTransform)->Arg(65)->Arg(129)->Unit(benchmark::kMillisecond);

void BM_CsfStep(benchmark::State& state) {
  SupportCurve c = make_ellipse(2.0, 1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(csf_run(c, 0.01, 1e-3, 2));
}
BENCHMARK(BM_CsfStep)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
