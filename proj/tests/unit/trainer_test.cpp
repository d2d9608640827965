#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "relmarl/scenarios.hpp"
#include "relmarl/trainer.hpp"

using namespace relmarl;

namespace {

TrainConfig quick(std::size_t episodes) {
  TrainConfig cfg;
  cfg.episodes = episodes;
  cfg.hidden = {16, 16};
  cfg.eval_every = 10;
  return cfg;
}

std::vector<Mlp> fresh_nets(const Environment& env, std::size_t seed, std::size_t hidden) {
  Rng rng(seed);
  const std::size_t h[] = {hidden};
  std::vector<Mlp> nets;
  for (std::size_t i = 0; i < env.agent_count(); ++i) nets.push_back(init_net(env.observation_size(), h, 5, rng));
  return nets;
}

}  // namespace

TEST(Trainer, EpsilonSchedule) {
  TrainConfig cfg;
  cfg.episodes = 1000;
  EXPECT_EQ(epsilon_at(0, cfg), 1.0);
  EXPECT_EQ(epsilon_at(800, cfg), 0.05);
  EXPECT_EQ(epsilon_at(999, cfg), 0.05);
  EXPECT_DOUBLE_EQ(epsilon_at(400, cfg), (1.0 + 0.05) / 2.0);
  EXPECT_GT(epsilon_at(100, cfg), epsilon_at(101, cfg));
}

TEST(Trainer, ConfigValidation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.gamma = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.batch = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.freeze = FreezeDirective{0, cfg.episodes};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Trainer, FullExplorationIsUniform) {
  auto env = make_environment("switch2");
  const auto nets = fresh_nets(*env, 1, 8);
  const std::vector<double> eps{1.0, 1.0};
  Rng rng(3);
  ReplayMemory replay(100000);
  while (replay.size() < 5000) rollout_episode(*env, nets, eps, rng, &replay);
  std::vector<double> counts(5, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < replay.size(); ++k) {
    for (std::size_t a : replay[k].joint_action) {
      counts[a] += 1.0;
      total += 1.0;
    }
  }
  ASSERT_GE(total, 10000.0);
  const double sigma = std::sqrt(total * 0.2 * 0.8);
  for (double c : counts) EXPECT_LE(std::abs(c - total * 0.2), 3.0 * sigma);
}

TEST(Trainer, GreedyRolloutIsRepeatableAndBounded) {
  auto env = make_environment("rc");
  const auto nets = fresh_nets(*env, 2, 8);
  const std::vector<double> eps{0.0, 0.0};
  Rng a(1), b(2);
  ReplayMemory ra(1000), rb(1000);
  const auto sa = rollout_episode(*env, nets, eps, a, &ra);
  const auto sb = rollout_episode(*env, nets, eps, b, &rb);
  EXPECT_EQ(sa.rewards, sb.rewards);
  ASSERT_EQ(ra.size(), rb.size());
  for (std::size_t k = 0; k < ra.size(); ++k) EXPECT_EQ(ra[k], rb[k]);
  EXPECT_LE(sa.steps, 50u);
  EXPECT_EQ(ra.size(), sa.steps);
}

TEST(Trainer, ZeroEpisodesLeavesInitializedNets) {
  auto env = make_environment("rc");
  const auto art = train_run(*env, RelationalNetwork::self_interest(2), quick(0));
  EXPECT_TRUE(art.evals.empty());
  EXPECT_TRUE(art.training.empty());
  EXPECT_EQ(art.updates_attempted, 0u);
  EXPECT_EQ(art.nets, art.targets);
  const auto again = train_run(*env, RelationalNetwork::self_interest(2), quick(0));
  EXPECT_EQ(art.nets, again.nets);
  for (const auto& net : art.nets) {
    for (const auto& l : net.layers()) {
      for (double b : l.bias) EXPECT_EQ(b, 0.0);
    }
  }
}

TEST(Trainer, RunsAreBitwiseReproducible) {
  auto env = make_environment("switch2");
  const auto g = parse_network("agents=2; 0->0:1, 1->1:1, 0->1:0.5");
  const auto a = train_run(*env, g, quick(30));
  const auto b = train_run(*env, g, quick(30));
  EXPECT_EQ(a.nets, b.nets);
  EXPECT_EQ(a.evals, b.evals);
  EXPECT_EQ(a.audit.explore_draws, b.audit.explore_draws);
  EXPECT_EQ(a.audit.sample_draws, b.audit.sample_draws);
  TrainConfig other = quick(30);
  other.seed = 43;
  EXPECT_NE(train_run(*env, g, other).nets, a.nets);
}

TEST(Trainer, UpdateCadence) {
  auto env = make_environment("rc");
  const auto art = train_run(*env, RelationalNetwork::self_interest(2), quick(40));
  EXPECT_EQ(art.updates_attempted, 400u);
  // skipped updates form a whole-episode prefix while replay < batch
  const std::size_t skipped = art.updates_attempted - art.updates_applied;
  EXPECT_EQ(skipped % 10, 0u);
  EXPECT_LE(skipped / 10, 32u);
  EXPECT_EQ(art.audit.sample_draws >= art.updates_applied * 32, true);
  ASSERT_EQ(art.evals.size(), 4u);
  EXPECT_EQ(art.evals.back().episode, 40u);
}

TEST(Trainer, TargetsOnlyChangeAtSyncEpisodes) {
  auto env = make_environment("switch2");
  const auto g = RelationalNetwork::self_interest(2);
  TrainConfig cfg = quick(25);
  cfg.target_sync_every = 10;
  std::vector<std::vector<Mlp>> nets_after;
  TrainObserver obs;
  obs.on_episode = [&](std::size_t, std::span<const Mlp> nets) { nets_after.emplace_back(nets.begin(), nets.end()); };
  const auto art = train_run(*env, g, cfg, 0, obs);
  EXPECT_EQ(art.target_sync_episodes, (std::vector<std::size_t>{10, 20}));
  // final targets are the prediction nets as they stood after episode 20
  EXPECT_EQ(art.targets, nets_after[19]);
  EXPECT_NE(art.targets, art.nets);

  TrainConfig never = quick(9);
  never.target_sync_every = 10;
  const auto stale = train_run(*env, g, never);
  const auto init = train_run(*env, g, quick(0));
  EXPECT_EQ(stale.targets, init.targets);
  EXPECT_NE(stale.nets, init.nets);
}

TEST(Trainer, FrozenAgentStopsLearning) {
  auto env = make_environment("switch2");
  TrainConfig cfg = quick(30);
  cfg.freeze = FreezeDirective{1, 12};
  std::vector<std::vector<Mlp>> nets_after;
  TrainObserver obs;
  obs.on_episode = [&](std::size_t, std::span<const Mlp> nets) { nets_after.emplace_back(nets.begin(), nets.end()); };
  const auto art = train_run(*env, RelationalNetwork::self_interest(2), cfg, 0, obs);
  ASSERT_EQ(art.snapshots.size(), 1u);
  EXPECT_EQ(art.snapshots[0].episode, 12u);
  EXPECT_EQ(serialize_net(art.snapshots[0].nets[1]), serialize_net(art.nets[1]));
  for (std::size_t e = 12; e <= 30; ++e) EXPECT_EQ(nets_after[e - 1][1], art.nets[1]);
  EXPECT_NE(art.snapshots[0].nets[0], art.nets[0]);
  EXPECT_NE(nets_after[5][1], art.nets[1]);
}

TEST(Trainer, RejectsMismatchedGraph) {
  auto env = make_environment("rc");
  EXPECT_THROW(train_run(*env, RelationalNetwork::self_interest(3), quick(1)), std::invalid_argument);
}
