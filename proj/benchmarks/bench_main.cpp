#include <benchmark/benchmark.h>

#include <vector>

#include "relmarl/neural.hpp"
#include "relmarl/scenarios.hpp"
#include "relmarl/trainer.hpp"

using namespace relmarl;

namespace {

constexpr std::size_t kBatch = 32;

Mlp default_net(std::size_t inputs) {
  Rng rng(1);
  const std::size_t hidden[] = {128, 128};
  return init_net(inputs, hidden, 5, rng);
}

std::vector<double> random_inputs(std::size_t n) {
  Rng rng(2);
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform(0.0, 1.0);
  return x;
}

void BM_ForwardBatch(benchmark::State& state) {
  const auto inputs = static_cast<std::size_t>(state.range(0));
  const Mlp net = default_net(inputs);
  const auto x = random_inputs(kBatch * inputs);
  ForwardCache cache;
  for (auto _ : state) {
    forward_batch(net, x, kBatch, cache);
    benchmark::DoNotOptimize(cache.output(0).data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kBatch));
}
BENCHMARK(BM_ForwardBatch)->Arg(7)->Arg(12);

void BM_ForwardSingle(benchmark::State& state) {
  const Mlp net = default_net(12);
  const auto x = random_inputs(12);
  for (auto _ : state) benchmark::DoNotOptimize(forward(net, x));
}
BENCHMARK(BM_ForwardSingle);

void BM_BackwardBatch(benchmark::State& state) {
  const Mlp net = default_net(12);
  const auto x = random_inputs(kBatch * 12);
  std::vector<std::size_t> actions(kBatch);
  std::vector<double> upstream(kBatch);
  for (std::size_t r = 0; r < kBatch; ++r) {
    actions[r] = r % 5;
    upstream[r] = 0.01 * static_cast<double>(r) - 0.1;
  }
  ForwardCache cache;
  Gradients grads = Gradients::zeros_like(net);
  for (auto _ : state) {
    forward_batch(net, x, kBatch, cache);
    backward_batch(net, cache, actions, upstream, grads);
    benchmark::DoNotOptimize(grads.layers[0].weights.data());
  }
}
BENCHMARK(BM_BackwardBatch);

void BM_AdamStep(benchmark::State& state) {
  Mlp net = default_net(12);
  AdamOptimizer opt(net);
  Gradients grads = Gradients::zeros_like(net);
  for (auto& l : grads.layers) {
    for (double& w : l.weights) w = 1e-3;
  }
  for (auto _ : state) opt.step(net, grads);
}
BENCHMARK(BM_AdamStep);

void BM_EnvStep(benchmark::State& state, const char* scenario) {
  auto env = make_environment(scenario);
  Rng rng(3);
  std::vector<std::size_t> actions(env->agent_count());
  env->reset();
  for (auto _ : state) {
    if (env->done()) env->reset();
    for (auto& a : actions) a = rng.uniform_index(5);
    benchmark::DoNotOptimize(env->step(actions));
  }
}
BENCHMARK_CAPTURE(BM_EnvStep, rc, "rc");
BENCHMARK_CAPTURE(BM_EnvStep, rc_bc, "rc-bc");
BENCHMARK_CAPTURE(BM_EnvStep, switch4, "switch4");

void BM_TrainEpisodes(benchmark::State& state) {
  auto env = make_environment("switch2");
  TrainConfig cfg;
  cfg.episodes = 20;
  cfg.eval_every = 1000;
  const auto graph = RelationalNetwork::self_interest(2);
  for (auto _ : state) benchmark::DoNotOptimize(train_run(*env, graph, cfg).updates_applied);
  state.SetItemsProcessed(state.iterations() * 20);
}
BENCHMARK(BM_TrainEpisodes)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
