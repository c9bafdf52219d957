#include <benchmark/benchmark.h>

#include "covhf/baselines.hpp"
#include "covhf/preavg.hpp"
#include "covhf/simulate.hpp"
#include "covhf/weight.hpp"

using namespace covhf;

namespace {

SimulatedPair pair_at(std::uint64_t n) {
  ScenarioSpec s;
  s.diffusion.rho = 0.5;
  s.noise.mode = NoiseMode::gaussian_iid;
  s.noise.omega_x = s.noise.omega_y = 0.005;
  s.sampling.n_scale = n;
  s.seed = 1;
  return simulate_scenario(s);
}

void BM_ModifiedPhy(benchmark::State& state) {
  const auto sim = pair_at(static_cast<std::uint64_t>(state.range(0)));
  const WeightScheme w = WeightScheme::triangular();
  const EstimatorConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(modified_phy(sim.x, sim.y, w, cfg).estimate);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sim.x.size() + sim.y.size()));
}
BENCHMARK(BM_ModifiedPhy)->RangeMultiplier(4)->Range(500, 32000)->Unit(benchmark::kMicrosecond);

void BM_HayashiYoshida(benchmark::State& state) {
  const auto sim = pair_at(static_cast<std::uint64_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hayashi_yoshida(sim.x, sim.y));
}
BENCHMARK(BM_HayashiYoshida)->RangeMultiplier(4)->Range(500, 32000)->Unit(benchmark::kMicrosecond);

void BM_Interpolate(benchmark::State& state) {
  const auto sim = pair_at(static_cast<std::uint64_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(interpolate(sim.x.design(), sim.y.design()).refresh.size());
}
BENCHMARK(BM_Interpolate)->RangeMultiplier(4)->Range(500, 32000)->Unit(benchmark::kMicrosecond);

void BM_KernelConstants(benchmark::State& state) {
  const WeightScheme w = WeightScheme::triangular(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernel_constants(w).kappa);
}
BENCHMARK(BM_KernelConstants)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SimulateScenario(benchmark::State& state) {
  ScenarioSpec s;
  s.sampling.n_scale = static_cast<std::uint64_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    s.seed = ++seed;
    benchmark::DoNotOptimize(simulate_scenario(s).x.size());
  }
}
BENCHMARK(BM_SimulateScenario)->RangeMultiplier(4)->Range(500, 32000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
