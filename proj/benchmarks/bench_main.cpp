#include <benchmark/benchmark.h>

#include <vector>

#include "sticky/chain.hpp"
#include "sticky/density.hpp"
#include "sticky/form.hpp"
#include "sticky/quadrature.hpp"
#include "sticky/sampler.hpp"
#include "sticky/wetting.hpp"

using namespace sticky;

namespace {

// Grid-chain events per second; the counter is the figure of merit.
void BM_ChainEvents(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto rho = make_exponential_density(std::vector<double>(n, 1.0));
  GridSchemeSpec s;
  s.h = 0.02;
  s.L = 25.0;
  s.T = 20.0;
  std::uint64_t events = 0;
  for (auto _ : state) {
    ++s.seed;
    const auto traj = simulate(std::vector<double>(n, 0.0), rho, 1.0, s);
    events += traj.events;
    benchmark::DoNotOptimize(traj.total_time);
  }
  state.counters["events/s"] =
      benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ChainEvents)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_WettingChainEvents(benchmark::State& state) {
  const auto rho = make_wetting_density(LatticeSpec(2, 2), make_potential("gaussian"));
  GridSchemeSpec s;
  s.h = 0.02;
  s.L = 10.0;
  s.T = 5.0;
  std::uint64_t events = 0;
  for (auto _ : state) {
    ++s.seed;
    const auto traj = simulate(std::vector<double>(4, 0.0), rho, 1.0, s);
    events += traj.events;
  }
  state.counters["events/s"] =
      benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_WettingChainEvents)->Unit(benchmark::kMillisecond);

void BM_QuadratureMass(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto nodes = static_cast<std::size_t>(state.range(1));
  const auto rho = make_gaussian_density(std::vector<double>(n, 1.0));
  const StickyMeasureSpec spec{n, 1.0, 12.0, nodes};
  for (auto _ : state) benchmark::DoNotOptimize(stratum_masses(rho, spec).mass.front().second);
}
BENCHMARK(BM_QuadratureMass)
    ->Args({1, 64})
    ->Args({2, 16})
    ->Args({2, 32})
    ->Args({3, 16})
    ->Unit(benchmark::kMillisecond);

void BM_CheckIbp(benchmark::State& state) {
  const auto rho = make_exponential_density({1.0, 0.5});
  const StickyMeasureSpec spec{2, 0.7, 40.0, 16};
  const auto fam = builtin_test_functions(2, 2.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(check_ibp(fam[4], fam[7], rho, spec).rel_residual);
}
BENCHMARK(BM_CheckIbp)->Unit(benchmark::kMillisecond);

// Gibbs sweeps per second for the wetting conditionals.
void BM_SamplerSweep(benchmark::State& state) {
  const auto N = static_cast<int>(state.range(0));
  const auto rho = make_wetting_density(LatticeSpec(1, N), make_potential("quartic"));
  const StickyMeasureSpec spec{static_cast<std::size_t>(N), 1.0, 10.0, 16};
  SamplerConfig cfg;
  cfg.n_samples = 1000;
  cfg.burn_in = 0;
  for (auto _ : state) {
    ++cfg.seed;
    benchmark::DoNotOptimize(sample_invariant(rho, spec, cfg).size());
  }
  state.counters["sweeps/s"] = benchmark::Counter(
      static_cast<double>(state.iterations() * cfg.n_samples), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SamplerSweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
