#include <benchmark/benchmark.h>

#include "fedcvr/runtime/experiment.hpp"

using namespace fedcvr;

namespace {

// Whole non-IID runs; the per-round server share is reported as a counter.
void BM_FedCvrRun(benchmark::State& state) {
  runtime::ExperimentConfig cfg;
  cfg.task.regression.clients = static_cast<std::size_t>(state.range(0));
  cfg.rounds = 41;
  cfg.participants = 10;
  policies::FedCvrConfig policy;
  policy.warmup_rounds = 5;
  cfg.policy = policy;
  cfg.record_wall_clock = true;
  double server_ms = 0.0;
  std::size_t rounds = 0;
  for (auto _ : state) {
    const auto result = runtime::run_experiment(cfg, 0);
    for (const auto& m : result.trace) {
      if (m.round > policy.warmup_rounds) {
        server_ms += m.server_ms;
        ++rounds;
      }
    }
  }
  state.counters["server_ms_per_round"] = server_ms / static_cast<double>(rounds);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FedCvrRun)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond)->Complexity();

void BM_UniformRun(benchmark::State& state) {
  runtime::ExperimentConfig cfg;
  cfg.task.regression.clients = static_cast<std::size_t>(state.range(0));
  cfg.rounds = 41;
  cfg.participants = 10;
  cfg.policy = policies::UniformConfig{};
  for (auto _ : state) benchmark::DoNotOptimize(runtime::run_experiment(cfg, 0));
}
BENCHMARK(BM_UniformRun)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
