#include "relmarl/trainer.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace relmarl {
namespace {

enum Stream : std::uint64_t { kInitStream = 0, kExploreStream = 1, kSampleStream = 2 };

// Reusable buffers for one batched update.
struct UpdateWorkspace {
  std::vector<double> states;
  std::vector<double> next_states;
  std::vector<double> team;
  std::vector<char> terminal;
  std::vector<std::vector<std::size_t>> actions;  // per agent
  std::vector<ForwardCache> predicted;            // per agent
  std::vector<ForwardCache> bootstrapped;         // per agent
  std::vector<Gradients> grads;                   // per agent
  std::vector<double> upstream;
};

}  // namespace

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("training config: ") + what);
  };
  require(updates_per_episode > 0, "updates_per_episode must be positive");
  require(batch > 0, "batch must be positive");
  require(replay_capacity >= batch, "replay_capacity must hold at least one batch");
  require(learning_rate > 0.0, "learning rate must be positive");
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  require(target_sync_every > 0, "target_sync_every must be positive");
  require(eval_every > 0, "eval_every must be positive");
  require(epsilon.start >= epsilon.end && epsilon.end >= 0.0 && epsilon.start <= 1.0,
          "epsilon schedule needs 1 >= start >= end >= 0");
  require(epsilon.anneal_fraction >= 0.0 && epsilon.anneal_fraction <= 1.0, "anneal fraction must lie in [0, 1]");
  require(!hidden.empty() && std::all_of(hidden.begin(), hidden.end(), [](std::size_t h) { return h > 0; }),
          "hidden layer widths must be positive");
  if (freeze) require(freeze->at_episode < episodes, "freeze_at must be earlier than the last episode");
}

double epsilon_at(std::size_t episode, const TrainConfig& config) {
  const EpsilonSchedule& e = config.epsilon;
  const double anneal_end = e.anneal_fraction * static_cast<double>(config.episodes);
  const auto ep = static_cast<double>(episode);
  if (anneal_end <= 0.0 || ep >= anneal_end) return e.end;
  return e.start + (e.end - e.start) * (ep / anneal_end);
}

EpisodeStats rollout_episode(Environment& env, std::span<const Mlp> nets, std::span<const double> epsilons, Rng& rng,
                             ReplayMemory* replay) {
  const std::size_t n = env.agent_count();
  if (nets.size() != n || epsilons.size() != n) {
    throw std::invalid_argument("rollout: need one network and one epsilon per agent");
  }
  env.reset();
  EpisodeStats stats;
  stats.rewards.assign(n, 0.0);
  std::vector<double> state = env.observe();
  while (!env.done()) {
    std::vector<std::size_t> actions(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.uniform01() < epsilons[i]) {
        actions[i] = rng.uniform_index(env.action_count());
      } else {
        actions[i] = greedy_action(forward(nets[i], state));
      }
    }
    StepOutcome out = env.step(actions);
    std::vector<double> next = env.observe();
    for (std::size_t i = 0; i < n; ++i) stats.rewards[i] += out.rewards[i];
    ++stats.steps;
    if (replay != nullptr) {
      replay->push({state, std::move(actions), std::move(out.rewards), next, out.terminal});
    }
    state = std::move(next);
  }
  return stats;
}

RunArtifacts train_run(const Environment& env, const TeamRewardFn& team_reward, const TrainConfig& config,
                       std::size_t run_id, const TrainObserver& observer) {
  config.validate();
  if (!team_reward) throw std::invalid_argument("train_run: missing team reward function");
  const std::size_t n = env.agent_count();
  if (config.freeze && config.freeze->agent >= n) throw std::invalid_argument("freeze agent index out of range");

  Rng init_rng(derive_seed(config.seed, kInitStream));
  Rng explore_rng(derive_seed(config.seed, kExploreStream));
  Rng sample_rng(derive_seed(config.seed, kSampleStream));

  const std::size_t obs = env.observation_size();
  RunArtifacts art;
  std::vector<AdamOptimizer> optimizers;
  for (std::size_t i = 0; i < n; ++i) {
    art.nets.push_back(init_net(obs, config.hidden, env.action_count(), init_rng));
    optimizers.emplace_back(art.nets.back(), AdamConfig{config.learning_rate});
  }
  art.targets = art.nets;

  ReplayMemory replay(config.replay_capacity);
  auto play_env = env.clone();
  const std::size_t b = config.batch;

  UpdateWorkspace ws;
  ws.actions.assign(n, std::vector<std::size_t>(b));
  ws.predicted.resize(n);
  ws.bootstrapped.resize(n);
  for (const Mlp& net : art.nets) ws.grads.push_back(Gradients::zeros_like(net));

  auto frozen = [&](std::size_t agent, std::size_t episode) {
    return config.freeze && config.freeze->agent == agent && episode >= config.freeze->at_episode;
  };

  auto update = [&](std::size_t episode) {
    const auto idx = replay.sample_indices(b, sample_rng);
    ws.states.resize(b * obs);
    ws.next_states.resize(b * obs);
    ws.team.resize(b);
    ws.terminal.resize(b);
    for (std::size_t r = 0; r < b; ++r) {
      const Transition& t = replay[idx[r]];
      std::copy(t.state.begin(), t.state.end(), ws.states.begin() + static_cast<std::ptrdiff_t>(r * obs));
      std::copy(t.next_state.begin(), t.next_state.end(), ws.next_states.begin() + static_cast<std::ptrdiff_t>(r * obs));
      ws.team[r] = team_reward(t.rewards);
      ws.terminal[r] = t.terminal ? 1 : 0;
      for (std::size_t i = 0; i < n; ++i) ws.actions[i][r] = t.joint_action[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      forward_batch(art.nets[i], ws.states, b, ws.predicted[i]);
      forward_batch(art.targets[i], ws.next_states, b, ws.bootstrapped[i]);
    }
    ws.upstream.resize(b);
    std::vector<double> chosen(n);
    JointQ next_q(n);
    for (std::size_t r = 0; r < b; ++r) {
      for (std::size_t i = 0; i < n; ++i) {
        chosen[i] = ws.predicted[i].output(r)[ws.actions[i][r]];
        const auto q = ws.bootstrapped[i].output(r);
        next_q[i].assign(q.begin(), q.end());
      }
      const double e = td_error_from_values(ws.team[r], config.gamma, ws.terminal[r] != 0, chosen, next_q);
      // d/dQ_i of mean squared TD error; identical for every agent since dQ_tot/dQ_i = 1
      ws.upstream[r] = -2.0 * e / static_cast<double>(b);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (frozen(i, episode)) continue;
      backward_batch(art.nets[i], ws.predicted[i], ws.actions[i], ws.upstream, ws.grads[i]);
      optimizers[i].step(art.nets[i], ws.grads[i]);
    }
  };

  std::vector<double> eps(n);
  for (std::size_t episode = 0; episode < config.episodes; ++episode) {
    const double epsilon = epsilon_at(episode, config);
    for (std::size_t i = 0; i < n; ++i) eps[i] = frozen(i, episode) ? 0.0 : epsilon;
    EpisodeStats stats = rollout_episode(*play_env, art.nets, eps, explore_rng, &replay);

    for (std::size_t u = 0; u < config.updates_per_episode; ++u) {
      ++art.updates_attempted;
      if (replay.size() < b) continue;
      update(episode);
      ++art.updates_applied;
    }

    const std::size_t completed = episode + 1;
    art.training.push_back({completed, epsilon, std::move(stats.rewards)});
    if (completed % config.target_sync_every == 0) {
      for (std::size_t i = 0; i < n; ++i) copy_into_target(art.nets[i], art.targets[i]);
      art.target_sync_episodes.push_back(completed);
    }
    if (config.freeze && completed == config.freeze->at_episode) art.snapshots.push_back({completed, art.nets});
    if (completed % config.eval_every == 0) {
      art.evals.push_back(make_record(run_id, completed, greedy_eval(env, art.nets), team_reward));
      if (observer.on_eval) observer.on_eval(art.evals.back());
    }
    if (observer.on_episode) observer.on_episode(completed, art.nets);
  }

  art.audit = {config.seed, init_rng.draws(), explore_rng.draws(), sample_rng.draws()};
  return art;
}

RunArtifacts train_run(const Environment& env, const RelationalNetwork& graph, const TrainConfig& config,
                       std::size_t run_id, const TrainObserver& observer) {
  if (graph.agent_count() != env.agent_count()) {
    throw std::invalid_argument("relational network has " + std::to_string(graph.agent_count()) +
                                " agents, scenario '" + std::string(env.scenario()) + "' has " +
                                std::to_string(env.agent_count()));
  }
  return train_run(env, [&graph](std::span<const double> r) { return graph.team_reward(r); }, config, run_id,
                   observer);
}

}  // namespace relmarl
