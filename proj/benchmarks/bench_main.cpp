#include <benchmark/benchmark.h>

#include "fdrl/baselines.hpp"
#include "fdrl/federation.hpp"
#include "fdrl/netsim.hpp"
#include "fdrl/nn.hpp"

using namespace fdrl;

namespace {

void BM_MlpForward(benchmark::State& state) {
  RandomStream rng(1);
  const AgentConfig cfg;
  const Mlp net = init_weights(network_dims(observation_dim(4), cfg, 10), rng);
  std::vector<double> x(net.input_dim(), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_MlpForward);

void BM_GradLogPolicy(benchmark::State& state) {
  RandomStream rng(1);
  const AgentConfig cfg;
  const Mlp net = init_weights(network_dims(observation_dim(4), cfg, 10), rng);
  std::vector<double> x(net.input_dim(), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(grad_log_policy(net, x, 3));
}
BENCHMARK(BM_GradLogPolicy);

void BM_EnvStep(benchmark::State& state) {
  TopologyConfig topo;
  topo.grid_side = static_cast<std::size_t>(state.range(0));
  EnvConfig env;
  env.horizon = 1u << 30;
  Environment e(topo, env, 1);
  e.reset();
  const ActionTensor actions(e.users(), 5);
  for (auto _ : state) benchmark::DoNotOptimize(e.step(actions));
}
BENCHMARK(BM_EnvStep)->Arg(3)->Arg(5);

void BM_Wmmse(benchmark::State& state) {
  TopologyConfig topo;
  topo.grid_side = static_cast<std::size_t>(state.range(0));
  Environment e(topo, EnvConfig{}, 1);
  e.reset();
  const GainTensor g = e.current_gains();
  for (auto _ : state) benchmark::DoNotOptimize(wmmse(g, e.p_max(), e.noise()));
}
BENCHMARK(BM_Wmmse)->Arg(3)->Arg(5);

void BM_FedAvg(benchmark::State& state) {
  RandomStream rng(1);
  const AgentConfig cfg;
  const Mlp net = init_weights(network_dims(observation_dim(4), cfg, 10), rng);
  const std::vector<WeightVector> clients(9, net.flatten());
  const std::vector<double> w(9, 1.0 / 9.0);
  for (auto _ : state) benchmark::DoNotOptimize(fedavg(clients, w));
}
BENCHMARK(BM_FedAvg);

void BM_TrainingEpisode(benchmark::State& state) {
  TopologyConfig topo;
  Environment env(topo, EnvConfig{}, 1);
  TrainingConfig train;
  train.episodes = 1;
  RandomStream rng(2);
  const Mlp init = init_weights(network_dims(observation_dim(4), train.agent, 10), rng);
  auto agents = make_agents(Algorithm::pg, init, 9, train.agent);
  for (auto _ : state) benchmark::DoNotOptimize(run_distributed(env, agents, train));
}
BENCHMARK(BM_TrainingEpisode);

}  // namespace

BENCHMARK_MAIN();
