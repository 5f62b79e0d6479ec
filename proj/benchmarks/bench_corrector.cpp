#include <benchmark/benchmark.h>

#include "monolod/coefficients.hpp"
#include "monolod/corrector.hpp"
#include "monolod/solver.hpp"

using namespace monolod;

namespace {

struct Fixture {
  NestedPair pair;
  InterpolationOperator interp;
  MatrixField field;

  explicit Fixture(int coarse_n, int fine_n)
      : pair(build_mesh(coarse_n), build_mesh(fine_n)),
        interp(compose_interpolation(pair)),
        field(linearize(LinearizationKind::newton, periodic_coefficient(1.0 / 16.0),
                        pair.fine(), {})
                  .field) {}
};

}  // namespace

static void BM_ElementCorrector(benchmark::State& state) {
  static Fixture fx(16, 64);
  const int m = static_cast<int>(state.range(0));
  const int center = fx.pair.coarse().element_index(8, 8, false);
  const Patch patch = build_patch(fx.pair, center, m);
  for (auto _ : state) {
    ElementCorrector ec = solve_element_corrector(fx.pair, patch, fx.field, fx.interp);
    benchmark::DoNotOptimize(ec.vectors[0].norm());
  }
}
BENCHMARK(BM_ElementCorrector)->Arg(1)->Arg(2)->Arg(3);

static void BM_CorrectorSet(benchmark::State& state) {
  static Fixture fx(16, 64);
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    CorrectorSet set = build_corrector_set(fx.pair, fx.field, fx.interp, m);
    benchmark::DoNotOptimize(set.basis().nonZeros());
  }
}
BENCHMARK(BM_CorrectorSet)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_LodGalerkinSolve(benchmark::State& state) {
  static Fixture fx(16, 64);
  static CorrectorSet set = build_corrector_set(fx.pair, fx.field, fx.interp, 2);
  const ProblemCoefficient coef =
      ProblemCoefficient::gradient_flux(periodic_coefficient(1.0 / 16.0));
  const Eigen::Vector2d x0(0.45, 0.5);
  auto f = [x0](const Eigen::Vector2d& x) {
    return 10.0 * std::exp(-0.1 * (x - x0).squaredNorm());
  };
  for (auto _ : state) {
    SolveResult result = solve_lod_galerkin(fx.pair, coef, f, set, {});
    benchmark::DoNotOptimize(result.iterations);
  }
}
BENCHMARK(BM_LodGalerkinSolve)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
