#include <benchmark/benchmark.h>

#include "monolod/coefficients.hpp"
#include "monolod/fem.hpp"
#include "monolod/interpolation.hpp"

using namespace monolod;

static void BM_MeshBuild(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    TriMesh mesh = build_mesh(n);
    benchmark::DoNotOptimize(mesh.element_count());
  }
}
BENCHMARK(BM_MeshBuild)->Arg(64)->Arg(256);

static void BM_StiffnessAssembly(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TriMesh mesh = build_mesh(n);
  const MatrixField field =
      linearize(LinearizationKind::newton, periodic_coefficient(1.0 / 32.0), mesh, {}).field;
  for (auto _ : state) {
    SparseOperator op = assemble_stiffness(mesh, field);
    benchmark::DoNotOptimize(op.matrix().nonZeros());
  }
}
BENCHMARK(BM_StiffnessAssembly)->Arg(64)->Arg(128)->Arg(256);

static void BM_PoissonSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TriMesh mesh = build_mesh(n);
  const SparseOperator op = assemble_stiffness(mesh, MatrixField(mesh.element_count()));
  const Eigen::VectorXd rhs = assemble_load(mesh, [](const Eigen::Vector2d&) { return 1.0; });
  for (auto _ : state) {
    ReducedSystem sys = eliminate_dirichlet(op, rhs, mesh.boundary_flags());
    benchmark::DoNotOptimize(sys.op.solve(sys.rhs).norm());
  }
}
BENCHMARK(BM_PoissonSolve)->Arg(64)->Arg(128);

static void BM_Interpolation(benchmark::State& state) {
  const NestedPair pair(build_mesh(static_cast<int>(state.range(0))), build_mesh(256));
  for (auto _ : state) {
    InterpolationOperator interp = compose_interpolation(pair);
    benchmark::DoNotOptimize(interp.matrix().nonZeros());
  }
}
BENCHMARK(BM_Interpolation)->Arg(16)->Arg(64);

BENCHMARK_MAIN();
