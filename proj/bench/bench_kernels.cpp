// SPDX-License-Identifier: Apache-2.0
//
// Serial reference against the OpenMP path for the two embarrassingly
// parallel kernels: the placement grid search and exhaustive allocation.
// PLAN_THREADS caps the team size as in the CLI.

#include <benchmark/benchmark.h>

#include <cmath>

#include "thzirs/allocation.hpp"
#include "thzirs/bcs.hpp"
#include "thzirs/experiment.hpp"

using namespace thz;

namespace {

ProblemInstance grid_instance(std::size_t ues) {
  const auto config = parse_config(R"({"irs": {"elements": 8}})");
  return make_instance(config, build_band_plan(config), 1, ues);
}

void BM_GridSearch(benchmark::State& state, ExecPolicy policy) {
  const auto inst = grid_instance(static_cast<std::size_t>(state.range(0)));
  const GridSpec grid{0.5, 0.5, true};
  for (auto _ : state) benchmark::DoNotOptimize(bcs_solve(inst, grid, {}, policy).sum_rate);
}

AllocationProblem allocation_problem() {
  AllocationProblem p;
  p.gains = GainTable(3, 4);
  p.p_max = 1.0;
  p.rate_requirements = {2e10, 2e10, 2e10};
  const double noise = 3.9810717055349855e-20;
  for (std::size_t i = 0; i < 4; ++i) p.bands.push_back({225e9 + 50e9 * static_cast<double>(i), 50e9, noise});
  SplitMix64 rng(9);
  for (std::size_t u = 0; u < 3; ++u)
    for (std::size_t i = 0; i < 4; ++i) p.gains(u, i) = noise * 50e9 * std::exp(rng.uniform(std::log(0.5), std::log(50.0)));
  return p;
}

void BM_BruteForce(benchmark::State& state, ExecPolicy policy) {
  const auto p = allocation_problem();
  const double step = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_allocation(p, step, policy).sum_rate);
}

}  // namespace

BENCHMARK_CAPTURE(BM_GridSearch, serial, ExecPolicy::Serial)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_GridSearch, parallel, ExecPolicy::Parallel)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_BruteForce, serial, ExecPolicy::Serial)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_BruteForce, parallel, ExecPolicy::Parallel)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  apply_thread_cap_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
