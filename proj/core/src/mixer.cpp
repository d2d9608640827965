#include "relmarl/mixer.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace relmarl {

double q_tot(std::span<const double> selected) {
  double total = 0.0;
  for (double q : selected) total += q;
  return total;
}

double joint_target_max(const JointQ& target_q) {
  double total = 0.0;
  for (const auto& q : target_q) {
    if (q.empty()) throw std::invalid_argument("joint_target_max: agent with no actions");
    total += *std::max_element(q.begin(), q.end());
  }
  return total;
}

std::size_t greedy_action(std::span<const double> q) {
  if (q.empty()) throw std::invalid_argument("greedy_action: empty value vector");
  std::size_t best = 0;
  for (std::size_t a = 1; a < q.size(); ++a) {
    if (q[a] > q[best]) best = a;
  }
  return best;
}

std::vector<std::size_t> greedy_joint_action(std::span<const Mlp> nets, std::span<const double> state) {
  std::vector<std::size_t> actions;
  actions.reserve(nets.size());
  for (const Mlp& net : nets) actions.push_back(greedy_action(forward(net, state)));
  return actions;
}

double td_error_from_values(double team_reward, double gamma, bool terminal, std::span<const double> chosen_q,
                            const JointQ& next_target_q) {
  const double bootstrap = terminal ? 0.0 : gamma * joint_target_max(next_target_q);
  return team_reward + bootstrap - q_tot(chosen_q);
}

std::vector<double> td_error(std::span<const Transition> batch, std::span<const Mlp> nets,
                             std::span<const Mlp> targets, const TeamRewardFn& team_reward, double gamma) {
  if (batch.empty()) throw std::invalid_argument("td_error: empty batch");
  if (nets.size() != targets.size()) throw std::invalid_argument("td_error: prediction and target counts differ");
  std::vector<double> errors;
  errors.reserve(batch.size());
  std::vector<double> chosen(nets.size());
  JointQ next_q(nets.size());
  for (const Transition& t : batch) {
    if (t.joint_action.size() != nets.size() || t.rewards.size() != nets.size()) {
      throw std::invalid_argument("td_error: transition agent count differs from network count");
    }
    for (std::size_t i = 0; i < nets.size(); ++i) {
      chosen[i] = forward(nets[i], t.state).at(t.joint_action[i]);
      next_q[i] = forward(targets[i], t.next_state);
    }
    errors.push_back(td_error_from_values(team_reward(t.rewards), gamma, t.terminal, chosen, next_q));
  }
  return errors;
}

std::vector<double> td_error(std::span<const Transition> batch, std::span<const Mlp> nets,
                             std::span<const Mlp> targets, const RelationalNetwork& graph, double gamma) {
  if (graph.agent_count() != nets.size()) {
    throw std::invalid_argument("td_error: graph has " + std::to_string(graph.agent_count()) + " agents, " +
                                std::to_string(nets.size()) + " networks supplied");
  }
  return td_error(batch, nets, targets, [&graph](std::span<const double> r) { return graph.team_reward(r); },
                  gamma);
}

}  // namespace relmarl
