#include <benchmark/benchmark.h>

#include "hetjsq/experiments.hpp"
#include "hetjsq/hybrid.hpp"
#include "hetjsq/meanfield.hpp"
#include "hetjsq/simulator.hpp"
#include "hetjsq/stability.hpp"
#include "hetjsq/static_routing.hpp"

namespace {

using namespace hetjsq;

void BM_FixedPointShooting(benchmark::State& state) {
  const auto c = fig1_system().with_arrival_rate(0.9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fixed_point(c, {EquilibriumMethod::ShootingM2}));
  }
}
BENCHMARK(BM_FixedPointShooting)->Unit(benchmark::kMicrosecond);

void BM_FixedPointOde(benchmark::State& state) {
  const auto c = fig1_system().with_arrival_rate(0.9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fixed_point(c, {EquilibriumMethod::OdeRelaxation}));
  }
}
BENCHMARK(BM_FixedPointOde)->Unit(benchmark::kMillisecond);

void BM_SolveStatic(benchmark::State& state) {
  const auto c = fig1_system().with_arrival_rate(0.9);
  for (auto _ : state) benchmark::DoNotOptimize(solve_static(c));
}
BENCHMARK(BM_SolveStatic);

void BM_SolveHybrid(benchmark::State& state) {
  const auto c = fig1_system().with_arrival_rate(0.9);
  for (auto _ : state) benchmark::DoNotOptimize(solve_hybrid(c));
}
BENCHMARK(BM_SolveHybrid)->Unit(benchmark::kMicrosecond);

void BM_FiniteNLimit(benchmark::State& state) {
  const auto c = fig2_system();
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(finite_n_limit(c, n));
}
BENCHMARK(BM_FiniteNLimit)->Arg(200)->Arg(1'000'000);

// Items per second is simulated jobs per second.
void BM_SimulateSq2(benchmark::State& state) {
  SimConfig s;
  s.system = fig1_system().with_arrival_rate(0.9);
  s.n_servers = static_cast<std::size_t>(state.range(0));
  s.scheme = Scheme::sq_d(2);
  s.job_size = {JobSizeKind::Exponential, 1.0};
  s.horizon = 200'000;
  s.replications = 1;
  s.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_replication(s, 0));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * s.horizon));
}
BENCHMARK(BM_SimulateSq2)->Arg(10)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
