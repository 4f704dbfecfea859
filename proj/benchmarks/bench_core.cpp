#include <benchmark/benchmark.h>

#include "psim/analysis.hpp"
#include "psim/training.hpp"

namespace {

using namespace psim;

Environment default_env() { return Environment::build({}); }

ClipNetwork trained_network(const Environment& env) {
  AgentConfig agent;
  TrainConfig cfg;
  cfg.total_rounds = 200'000;
  cfg.curve_window = 10'000;
  return run_training(env, Architecture::three_layer, agent, cfg, 1).net;
}

void BM_Deliberate(benchmark::State& state) {
  const Environment env = default_env();
  const ClipNetwork net = trained_network(env);
  const AgentConfig agent;
  Rng rng(7);
  DeliberationScratch scratch;
  for (auto _ : state) {
    const SetupId s = env.sample_setup(rng);
    benchmark::DoNotOptimize(deliberate(net, agent, s, rng, scratch));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Deliberate);

void BM_Update(benchmark::State& state) {
  const Environment env = default_env();
  ClipNetwork net = trained_network(env);
  const AgentConfig agent;
  const DeliberationPath path{4, 2, {3, 1}};
  for (auto _ : state) {
    update(net, agent, path, 1);
    benchmark::DoNotOptimize(net.h1()(4, 2));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Update);

void BM_TrainingRound(benchmark::State& state) {
  const Environment env = default_env();
  ClipNetwork net = make_network(env, Architecture::three_layer);
  const AgentConfig agent;
  Rng rng(11);
  DeliberationScratch scratch;
  for (auto _ : state) {
    const SetupId s = env.sample_setup(rng);
    const DeliberationPath path = deliberate(net, agent, s, rng, scratch);
    update(net, agent, path, env.evaluate(s, path.action));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TrainingRound);

void BM_ActionMarginal(benchmark::State& state) {
  const Environment env = default_env();
  const ClipNetwork net = trained_network(env);
  for (auto _ : state) {
    benchmark::DoNotOptimize(action_marginal(net, 13));
  }
}
BENCHMARK(BM_ActionMarginal);

void BM_SubsetScan(benchmark::State& state) {
  const Environment env = default_env();
  const ClipNetwork net = trained_network(env);
  const Matrix p1 = row_normalized(net.h1());
  for (auto _ : state) {
    benchmark::DoNotOptimize(subset_scan(p1));
  }
}
BENCHMARK(BM_SubsetScan);

void BM_EstimateEnvironment(benchmark::State& state) {
  const Environment env = default_env();
  const ClipNetwork net = trained_network(env);
  const Matrix p1 = row_normalized(net.h1());
  const Matrix p2 = row_normalized(net.h2());
  const ActionLayout layout{env.num_experiments(), env.config().values_per_variable};
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_environment(p1, p2, layout, AnalysisThresholds{}));
  }
}
BENCHMARK(BM_EstimateEnvironment);

}  // namespace

BENCHMARK_MAIN();
