#include <benchmark/benchmark.h>

#include "qmloc/bestapprox.hpp"
#include "qmloc/coefficient.hpp"
#include "qmloc/harness.hpp"
#include "qmloc/targets.hpp"

using namespace qmloc;

static void BM_QmCheckCheckerboard(benchmark::State& state) {
  const CoefficientMesh cm = checkerboard_mesh(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(check_quasi_monotonicity(cm.mesh, cm.a).quasi_monotone);
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cm.mesh.num_vertices()));
}
BENCHMARK(BM_QmCheckCheckerboard)->Arg(4)->Arg(16)->Arg(64);

static void BM_TargetMoments(benchmark::State& state) {
  const CoefficientMesh cm = refine(graded_quadrants(4.0), static_cast<int>(state.range(0)));
  const LagrangeSpace space = LagrangeSpace::build(cm.mesh, 2, false);
  const auto u = smooth_target("sin");
  const QuadraturePlan plan = make_quadrature_plan(cm.mesh, 12);
  for (auto _ : state) benchmark::DoNotOptimize(TargetMoments::compute(space, *u, plan).size());
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cm.mesh.num_triangles()));
}
BENCHMARK(BM_TargetMoments)->Arg(2)->Arg(4);

static void BM_GlobalRitz(benchmark::State& state) {
  const CoefficientMesh cm = refine(layered_quadrants(1e-4), static_cast<int>(state.range(0)));
  const LagrangeSpace space = LagrangeSpace::build(cm.mesh, 1, true);
  const auto u = smooth_target("exp");
  const TargetMoments mom = TargetMoments::compute(space, *u, make_quadrature_plan(cm.mesh, 8));
  SolverOptions opt;
  opt.dense_cross_check = false;
  for (auto _ : state) benchmark::DoNotOptimize(global_best_error(mom, cm.a, opt).error_sq);
  state.counters["nodes"] = static_cast<double>(space.num_nodes());
}
BENCHMARK(BM_GlobalRitz)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_HexagonSweepPoint(benchmark::State& state) {
  const double eps = 1.0 / static_cast<double>(state.range(0));
  const HarnessOptions opt = default_harness_options();
  for (auto _ : state) benchmark::DoNotOptimize(run_hexagon_sweep({eps}, opt).size());
}
BENCHMARK(BM_HexagonSweepPoint)->Arg(10)->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
