// Serial reference loops against the OpenMP kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "dol/canadian_model.hpp"
#include "dol/gamma_process.hpp"
#include "dol/gof.hpp"
#include "dol/parallel.hpp"
#include "dol/records.hpp"
#include "dol/reliability.hpp"
#include "dol/us_model.hpp"

using namespace dol;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) ? Execution::parallel : Execution::serial;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) ? "parallel, " + std::to_string(max_threads()) + " threads" : "serial");
}

const DatasetManifest& design() {
  static const DatasetManifest m = reference_design();
  return m;
}

const std::vector<FailureRecord>& gamma_records() {
  static const std::vector<FailureRecord> recs = [] {
    std::vector<FailureRecord> out;
    for (const auto& g : design().groups) {
      auto r = gp_simulate(gamma_reference_params(), g, g.size, 1);
      out.insert(out.end(), r.begin(), r.end());
    }
    return out;
  }();
  return recs;
}

void BM_UsSimulate(benchmark::State& state) {
  const auto& g = design().groups[8];
  for (auto _ : state) benchmark::DoNotOptimize(us_simulate(UsParams{}, g, 10'000, 3, mode(state)));
  label(state);
}

void BM_CanadianSimulate(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(canadian_simulate_dataset(canadian_reference_hyperparams(), design(), 3, mode(state)));
  }
  label(state);
}

void BM_GammaLikelihood(benchmark::State& state) {
  static const GpLikelihoodCache cache(gamma_records(), design());
  const auto p = gamma_reference_params();
  for (auto _ : state) benchmark::DoNotOptimize(cache.log_likelihood(p, mode(state)));
  label(state);
}

void BM_GammaSimulate(benchmark::State& state) {
  const auto& prof = design().groups[8].profile;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gp_simulate_times(gamma_reference_params(), prof, 2000, 3, mode(state)));
  }
  label(state);
}

void BM_ReliabilityCurve(benchmark::State& state) {
  ReliabilityConfig cfg;
  cfg.trials = 2000;
  cfg.execution = mode(state);
  const auto phis = phi_grid(0.5, 1.5, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(prob_failure_curve(UsParams{}, phis, cfg, 5));
  label(state);
}

}  // namespace

BENCHMARK(BM_UsSimulate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CanadianSimulate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GammaLikelihood)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GammaSimulate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReliabilityCurve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
