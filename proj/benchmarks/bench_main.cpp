#include <benchmark/benchmark.h>

#include "aoi/evaluation.hpp"
#include "aoi/policies.hpp"
#include "aoi/solvers.hpp"

using namespace aoi;

namespace {

const ServiceDistribution& row3() {
  static const ServiceDistribution d({0.05, 0.5, 0.1, 0.3, 0.05});
  return d;
}

void BM_RelativeValueIteration(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(relative_value_iteration(row3(), K).value.gain);
  state.SetLabel("K=" + std::to_string(K));
}
BENCHMARK(BM_RelativeValueIteration)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_DiscountedValueIteration(benchmark::State& state) {
  SolverConfig cfg;
  cfg.discount = 0.99;
  for (auto _ : state) benchmark::DoNotOptimize(discounted_value_iteration(row3(), 200, cfg).values);
}
BENCHMARK(BM_DiscountedValueIteration)->Unit(benchmark::kMillisecond);

void BM_ExactChain(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const Policy policy = double_threshold({2, 5}, K, 5);
  for (auto _ : state) benchmark::DoNotOptimize(exact_average_age(policy, row3(), K).average_age);
}
BENCHMARK(BM_ExactChain)->Arg(200)->Arg(1000)->Arg(5000)->Unit(benchmark::kMicrosecond);

void BM_Renewal(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(renewal_reward_age({6, 4}, row3()).average_age);
}
BENCHMARK(BM_Renewal)->Unit(benchmark::kMicrosecond);

void BM_ThresholdSearch(benchmark::State& state) {
  const int K = 200;
  const PolicyEvaluator chain = [K](const Policy& p) {
    return exact_average_age(p, row3(), K).average_age;
  };
  for (auto _ : state) benchmark::DoNotOptimize(search_double_threshold(row3(), K, chain).gain);
}
BENCHMARK(BM_ThresholdSearch)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Simulate(benchmark::State& state) {
  const Policy policy = double_threshold({2, 5}, 200, 5);
  SimulationOptions options;
  options.horizon = state.range(0);
  options.replications = 4;
  options.record_trace = false;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(policy, row3(), options).report.average_age);
  state.SetItemsProcessed(state.iterations() * state.range(0) * 4);
}
BENCHMARK(BM_Simulate)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
