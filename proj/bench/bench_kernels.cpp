// Serial reference vs OpenMP kernels: grid maximization and replications.

#include "ropex/experiment.hpp"
#include "ropex/metrics.hpp"
#include "ropex/problems.hpp"

#include <benchmark/benchmark.h>

using namespace ropex;

namespace {

Point probe() {
  Point x(2);
  x << 33.0, 8.5;
  return x;
}

void BM_FeasibilityGap(benchmark::State& state, bool parallel) {
  const auto nash = nash_problem(false);
  const double step = 1.0 / double(state.range(0));
  const Point xt = probe();
  for (auto _ : state) benchmark::DoNotOptimize(feasibility_gap_bruteforce(nash, xt, step, parallel));
  state.counters["grid_step"] = step;
}

void BM_Replications(benchmark::State& state, bool serial) {
  ExperimentConfig c;
  c.problem.id = "nash";
  c.k_values = {state.range(0)};
  c.replications = 8;
  c.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(c, serial).records.size());
}

}  // namespace

BENCHMARK_CAPTURE(BM_FeasibilityGap, serial, false)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_FeasibilityGap, parallel, true)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Replications, serial, true)->Arg(1 << 14)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Replications, parallel, false)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
