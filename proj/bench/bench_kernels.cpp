// Serial reference vs OpenMP kernels. Run with --benchmark_filter to pick.

#include <benchmark/benchmark.h>

#include "medshift/inference.hpp"
#include "medshift/likelihood.hpp"
#include "medshift/parallel.hpp"
#include "medshift/simulation.hpp"

namespace {

using namespace medshift;

const Dataset& data(std::size_t n) {
  static const Dataset d1k = generate_dataset(carna_scenario(1000), 1);
  static const Dataset d10k = generate_dataset(carna_scenario(10000), 1);
  return n == 1000 ? d1k : d10k;
}

const StarParams kAt{1.57, 0.88, 0.42, 1.2, -0.95, 0.7};

void BM_LoglikReference(benchmark::State& state) {
  const CensoredLikelihood lik(data(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(lik.evaluate_reference(kAt).value);
}

void BM_LoglikParallel(benchmark::State& state) {
  const CensoredLikelihood lik(data(static_cast<std::size_t>(state.range(0))));
  set_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(lik.evaluate(kAt).value);
  set_threads(0);
}

void BM_Bootstrap(benchmark::State& state) {
  const Dataset& d = data(1000);
  BootstrapOptions opt;
  opt.reps = 100;
  set_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_ci(d, 0.29 * 0.29, 1.0, opt).ci_low);
  set_threads(0);
}

void BM_Study(benchmark::State& state) {
  set_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_study({carna_scenario(104)}, 50, 3).cells.size());
  }
  set_threads(0);
}

}  // namespace

BENCHMARK(BM_LoglikReference)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LoglikParallel)
    ->ArgsProduct({{1000, 10000}, {1, 2, 4}})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Bootstrap)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Study)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
