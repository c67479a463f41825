#include <benchmark/benchmark.h>

#include "vopi/agent.hpp"
#include "vopi/data.hpp"
#include "vopi/dispatch.hpp"
#include "vopi/quantile.hpp"

using namespace vopi;

static void BM_SolveDayAhead(benchmark::State& state) {
  const VppConfig vpp = VppConfig::reference();
  const PredictionInterval pi{4.0, 17.5, ProportionPair::central(0.05)};
  for (auto _ : state) benchmark::DoNotOptimize(solve_day_ahead(vpp, pi, 52.0));
}
BENCHMARK(BM_SolveDayAhead);

static void BM_MonetaryScore(benchmark::State& state) {
  const VppConfig vpp = VppConfig::reference();
  const PredictionInterval pi{4.0, 17.5, ProportionPair::central(0.05)};
  for (auto _ : state) benchmark::DoNotOptimize(monetary_score(vpp, pi, 52.0, 9.0));
}
BENCHMARK(BM_MonetaryScore);

static void BM_QrTrainStep(benchmark::State& state) {
  QrModel model(0.025, QrModelConfig{}, 1);
  const Dataset data = generate_synthetic(2000, 30.0, 1);
  for (std::size_t i = 0; i < data.size(); ++i) model.store(data.state(i), data[i].power);
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(model.train_step(static_cast<std::size_t>(state.range(0)), rng));
}
BENCHMARK(BM_QrTrainStep)->Arg(32)->Arg(128);

static void BM_AgentUpdate(benchmark::State& state) {
  const ActionSpace actions(0.05, static_cast<unsigned>(state.range(0)));
  AgentConfig cfg;
  cfg.seed = 3;
  Agent agent(actions, cfg);
  const Dataset data = generate_synthetic(2000, 30.0, 1);
  Rng rng(4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    agent.store(RewardRecord{data.state(i), i % actions.size(), -1400.0 - data[i].power});
  }
  for (auto _ : state) benchmark::DoNotOptimize(agent.update_from_buffer(rng));
}
BENCHMARK(BM_AgentUpdate)->Arg(2)->Arg(3);

static void BM_AgentGreedy(benchmark::State& state) {
  AgentConfig cfg;
  Agent agent(ActionSpace(0.05, 2), cfg);
  const FeatureVector s{0.1, -0.3, 0.7, 1.2};
  for (auto _ : state) benchmark::DoNotOptimize(agent.greedy_action(s));
}
BENCHMARK(BM_AgentGreedy);
BENCHMARK_MAIN();
