// Serial reference vs OpenMP paths of the sample-parallel kernels.

#include <benchmark/benchmark.h>

#include "mimoee/equilibrium_analysis.hpp"
#include "mimoee/experiment.hpp"

using namespace mimoee;

namespace {

ReducedScenario paired_scenario(ChannelKind channel = ChannelKind::mimo) {
  ScenarioParams p;
  p.players = 8;
  p.antennas = 4;
  p.max_power = 4.0;
  p.channel = channel;
  p.seed = 42;
  return reduce(generate_scenario(p));
}

Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::serial : Exec::parallel;
}

void BM_Lipschitz(benchmark::State& state) {
  const ReducedScenario s = paired_scenario();
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_lipschitz(s, 500, 1, exec_of(state)));
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "openmp");
}

void BM_PowerSetSmoothness(benchmark::State& state) {
  const ReducedScenario s = paired_scenario();
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_power_set_smoothness(s, 500, 1, exec_of(state)));
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "openmp");
}

void BM_PowerSmoothness(benchmark::State& state) {
  const ReducedScenario s = paired_scenario();
  PowerSmoothnessConfig cfg;
  cfg.n_pairs = 100;
  const RealVector w = RealVector::Ones(8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_power_smoothness(s, cfg, w, exec_of(state)));
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "openmp");
}

void BM_CriteriaSweep(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.scenario.max_power = 4.0;
  cfg.snr_db = {5.0};
  cfg.sir_db = {0.0, 10.0};
  cfg.trials = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_criteria_sweep(cfg, exec_of(state)));
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "openmp");
}

}  // namespace

BENCHMARK(BM_Lipschitz)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PowerSetSmoothness)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PowerSmoothness)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CriteriaSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
