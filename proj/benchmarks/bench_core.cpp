#include <benchmark/benchmark.h>

#include "snq/field.hpp"
#include "snq/metrics.hpp"
#include "snq/monte_carlo.hpp"
#include "snq/uncertainty.hpp"

namespace {

snq::SynthOffice fixture(std::size_t positions) {
  snq::OfficeConfigSpec spec;
  spec.d2s_dba = 5.0;
  spec.lpas4m_dba = 48.0;
  spec.rate_spread_db = 1.0;
  return snq::synth_office(spec, snq::PathGeometry::log_spaced(2.0, 8.0, positions));
}

void BM_ComputeSnq(benchmark::State& state) {
  const auto synth = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(snq::compute_snq(synth.path));
  }
}
BENCHMARK(BM_ComputeSnq)->Arg(7)->Arg(32);

void BM_AnalyticBudget(benchmark::State& state) {
  const auto synth = fixture(static_cast<std::size_t>(state.range(0)));
  const snq::OctaveUncertaintyTable table;
  const snq::DistanceErrorModel dist;
  for (auto _ : state) {
    benchmark::DoNotOptimize(snq::analytic_budget(synth.path, table, dist));
  }
}
BENCHMARK(BM_AnalyticBudget)->Arg(7)->Arg(32);

void BM_EmulateMeasurement(benchmark::State& state) {
  const auto synth = fixture(7);
  const snq::McErrorModel model;
  std::uint64_t run = 0;
  for (auto _ : state) {
    snq::StreamRng rng(1234, run++);
    benchmark::DoNotOptimize(snq::emulate_measurement(synth.field, synth.path, model, rng));
  }
}
BENCHMARK(BM_EmulateMeasurement);

void BM_EmulateGridCoupled(benchmark::State& state) {
  const auto synth = fixture(7);
  const auto grid = snq::grid_from_loglinear(synth.field);
  snq::McErrorModel model;
  model.couple_levels_to_position = true;
  std::uint64_t run = 0;
  for (auto _ : state) {
    snq::StreamRng rng(1234, run++);
    benchmark::DoNotOptimize(snq::emulate_measurement(grid, synth.path, model, rng));
  }
}
BENCHMARK(BM_EmulateGridCoupled);

void BM_RunMcBatch(benchmark::State& state) {
  const auto synth = fixture(7);
  const snq::McErrorModel model;
  snq::McConfig cfg;
  cfg.batch_size = 1000;
  cfg.max_batches = 1;
  cfg.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(snq::run_mc(synth.field, synth.path, model, cfg));
  }
}
BENCHMARK(BM_RunMcBatch)->Arg(1)->Arg(2);

}  // namespace

BENCHMARK_MAIN();
