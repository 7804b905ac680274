// Serial references against the OpenMP kernels.

#include <benchmark/benchmark.h>

#include "rldf/config.hpp"
#include "rldf/harness.hpp"
#include "rldf/value_iteration.hpp"

namespace {

using namespace rldf;

RunConfiguration base_configuration(int episodes) {
  auto cfg = RunConfiguration::from_json(
      {{"grammar", default_grammar_document()},
       {"environment", {{"terminal", {{"frequency", "two"}, {"noun", "dog"}, {"density", "few"}, {"scene", "park"}}}}},
       {"agent", {{"episodes", episodes}}}});
  return cfg;
}

struct Lattice {
  RunConfiguration cfg = base_configuration(1);
  SimulatedOracle oracle{cfg.grammar, cfg.oracle};
  Environment env{cfg.grammar, cfg.environment, oracle, cfg.reward};
};

void BM_BuildModelSerial(benchmark::State& state) {
  Lattice l;
  for (auto _ : state) benchmark::DoNotOptimize(reference::build_model_serial(l.env, l.oracle));
}

void BM_BuildModelParallel(benchmark::State& state) {
  Lattice l;
  for (auto _ : state) benchmark::DoNotOptimize(build_model(l.env, l.oracle));
}

void BM_ValueIterationSerial(benchmark::State& state) {
  Lattice l;
  const auto model = build_model(l.env, l.oracle);
  for (auto _ : state) benchmark::DoNotOptimize(reference::value_iteration_serial(model, 0.9, 1e-10));
}

void BM_ValueIterationParallel(benchmark::State& state) {
  Lattice l;
  const auto model = build_model(l.env, l.oracle);
  for (auto _ : state) benchmark::DoNotOptimize(value_iteration(model, 0.9, 1e-10));
}

void BM_SweepSerial(benchmark::State& state) {
  const auto cfg = base_configuration(50);
  const auto grid = SweepGrid::standard();
  for (auto _ : state) benchmark::DoNotOptimize(reference::run_sweep_serial(cfg, grid));
}

void BM_SweepParallel(benchmark::State& state) {
  const auto cfg = base_configuration(50);
  const auto grid = SweepGrid::standard();
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(cfg, grid));
}

}  // namespace

BENCHMARK(BM_BuildModelSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildModelParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ValueIterationSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ValueIterationParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
