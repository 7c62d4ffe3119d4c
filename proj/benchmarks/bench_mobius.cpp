#include <benchmark/benchmark.h>

#include "mobius_mono/mobius.hpp"

using namespace mobius_mono;

namespace {

VecN v3(double x, double y, double z) {
  VecN v(3);
  v << x, y, z;
  return v;
}

MobiusMap three_letter_word() {
  return MobiusMap({Sphere(v3(0.4, -1.0, 2.5), 1.3), Hyperplane(v3(1, 0, 0), 0.0), Sphere(v3(0, 0, 3), 2.0)});
}

}  // namespace

static void BM_Decompose(benchmark::State& state) {
  for (auto _ : state) {
    MobiusMap m = three_letter_word();
    benchmark::DoNotOptimize(m.decomposition());
  }
}
BENCHMARK(BM_Decompose);

static void BM_ApplyWord(benchmark::State& state) {
  const MobiusMap m = three_letter_word();
  const ExtendedPoint x(v3(0.3, 0.2, -0.1));
  for (auto _ : state) benchmark::DoNotOptimize(apply(m, x));
}
BENCHMARK(BM_ApplyWord);

static void BM_BallImage(benchmark::State& state) {
  const MobiusMap m = three_letter_word();
  const Decomposition& d = *m.decomposition();
  for (auto _ : state) benchmark::DoNotOptimize(ball_image(d, 1.5));
}
BENCHMARK(BM_BallImage);
