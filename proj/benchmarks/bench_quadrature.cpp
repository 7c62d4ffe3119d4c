#include <benchmark/benchmark.h>

#include <cfloat>
#include <cmath>

#include "mobius_mono/quadrature.hpp"
#include "mobius_mono/surfaces.hpp"

using namespace mobius_mono;

namespace {

VecN v3(double x, double y, double z) {
  VecN v(3);
  v << x, y, z;
  return v;
}

ParametricPatch disk() {
  MatN m(3, 2);
  m << 0, 0, 1, 0, 0, 1;
  return flat_disk(v3(1.5, 0, 0), orthonormal_frame(m), 1.0);
}

// f for b = (2,0,0), R = 1.
double weight(const VecN& x) {
  const double gap = 7.0 - 4.0 * x(0);
  if (!(gap > 0.0)) return DBL_MAX;
  return 4.0 * (x - v3(1.5, 0, 0)).squaredNorm() / gap;
}

}  // namespace

static void BM_DiskSublevelArea(benchmark::State& state) {
  const ParametricPatch patch = disk();
  QuadratureOptions opts;
  opts.tol = std::pow(10.0, -static_cast<double>(state.range(0)));
  opts.threads = 1;
  const auto one = [](const SurfaceSample&) { return 1.0; };
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_region(patch, one, RegionSpec::sublevel(weight, 1.0 / 3.0), opts));
  }
}
BENCHMARK(BM_DiskSublevelArea)->Arg(7)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_DiskLevelCurve(benchmark::State& state) {
  const ParametricPatch patch = disk();
  QuadratureOptions opts;
  opts.threads = 1;
  const ScalarField f{weight, {}};
  const auto one = [](const SurfaceSample&) { return 1.0; };
  for (auto _ : state) benchmark::DoNotOptimize(level_curve_integral(patch, f, 1.0 / 3.0, one, opts));
}
BENCHMARK(BM_DiskLevelCurve)->Unit(benchmark::kMillisecond);
