#include <benchmark/benchmark.h>

#include <numbers>

#include "mobius_mono/monotonicity.hpp"

using namespace mobius_mono;

namespace {

Scenario catenoid_scenario() {
  ParamVec lo(2);
  ParamVec hi(2);
  lo << -std::numbers::pi, -0.9;
  hi << std::numbers::pi, 0.9;
  VecN b(3);
  b << 0, 0, 3;
  ScenarioOptions options;
  options.r_max = 1.9;
  return Scenario::reflection(b, 2.0, catenoid(1.0).with_domain(ParamBox{lo, hi}), options);
}

}  // namespace

static void BM_CatenoidJ(benchmark::State& state) {
  const Scenario scn = catenoid_scenario();
  for (auto _ : state) benchmark::DoNotOptimize(J_of_r(scn, 1.85));
}
BENCHMARK(BM_CatenoidJ)->Unit(benchmark::kMillisecond);

static void BM_CatenoidVolumeIdentity(benchmark::State& state) {
  const Scenario scn = catenoid_scenario();
  for (auto _ : state) benchmark::DoNotOptimize(volume_identity_residual(scn, 1.8, 1.9));
}
BENCHMARK(BM_CatenoidVolumeIdentity)->Unit(benchmark::kMillisecond);
