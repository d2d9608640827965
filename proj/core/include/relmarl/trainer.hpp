#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "relmarl/env.hpp"
#include "relmarl/evaluation.hpp"
#include "relmarl/mixer.hpp"
#include "relmarl/neural.hpp"
#include "relmarl/relgraph.hpp"
#include "relmarl/replay.hpp"
#include "relmarl/rng.hpp"

namespace relmarl {

/// Linear decay from `start` to `end` over the first `anneal_fraction` of
/// the episodes, constant afterwards.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  double anneal_fraction = 0.8;

  friend bool operator==(const EpsilonSchedule&, const EpsilonSchedule&) = default;
};

/// From episode `at_episode` on, `agent` is no longer updated and acts
/// greedily.
struct FreezeDirective {
  std::size_t agent = 0;
  std::size_t at_episode = 0;

  friend bool operator==(const FreezeDirective&, const FreezeDirective&) = default;
};

struct TrainConfig {
  std::size_t episodes = 5000;
  std::size_t updates_per_episode = 10;
  std::size_t batch = 32;
  std::size_t replay_capacity = 50000;
  double learning_rate = 1e-3;
  double gamma = 0.99;
  std::size_t target_sync_every = 200;
  EpsilonSchedule epsilon;
  std::size_t eval_every = 50;
  std::vector<std::size_t> hidden{128, 128};
  std::uint64_t seed = 42;
  std::optional<FreezeDirective> freeze;

  /// Throws std::invalid_argument on any out-of-range field.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

double epsilon_at(std::size_t episode, const TrainConfig& config);

struct EpisodeStats {
  std::vector<double> rewards;  ///< undiscounted per-agent sums
  std::size_t steps = 0;
};

/// Plays one episode from reset. For every agent in index order the run
/// stream yields one uniform draw; below epsilons[i] the agent takes a
/// uniformly random action (a second draw), otherwise its greedy action.
/// Each step is pushed to `replay` when one is given.
EpisodeStats rollout_episode(Environment& env, std::span<const Mlp> nets, std::span<const double> epsilons, Rng& rng,
                             ReplayMemory* replay);

struct TrainingPoint {
  std::size_t episode = 0;  ///< 1-based count of completed episodes
  double epsilon = 0.0;
  std::vector<double> rewards;
};

struct Snapshot {
  std::size_t episode = 0;
  std::vector<Mlp> nets;
};

struct RngAudit {
  std::uint64_t seed = 0;
  std::uint64_t init_draws = 0;
  std::uint64_t explore_draws = 0;
  std::uint64_t sample_draws = 0;
};

struct RunArtifacts {
  std::vector<Mlp> nets;     ///< final prediction networks
  std::vector<Mlp> targets;  ///< final target networks
  std::vector<EvalRecord> evals;
  std::vector<TrainingPoint> training;
  std::vector<Snapshot> snapshots;  ///< taken at the freeze episode, if any
  std::size_t updates_attempted = 0;
  std::size_t updates_applied = 0;
  std::vector<std::size_t> target_sync_episodes;
  RngAudit audit;
};

/// Optional progress callbacks; none affects the training result.
struct TrainObserver {
  std::function<void(const EvalRecord&)> on_eval;
  std::function<void(std::size_t completed, std::span<const Mlp> nets)> on_episode;
};

/// Centralized training of one Q-network per agent against the additive
/// central value, with the team reward formed by `team_reward`.
RunArtifacts train_run(const Environment& env, const TeamRewardFn& team_reward, const TrainConfig& config,
                       std::size_t run_id = 0, const TrainObserver& observer = {});

/// Same, with the team reward given by a relational network.
RunArtifacts train_run(const Environment& env, const RelationalNetwork& graph, const TrainConfig& config,
                       std::size_t run_id = 0, const TrainObserver& observer = {});

}  // namespace relmarl
