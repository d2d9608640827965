#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "relmarl/neural.hpp"
#include "relmarl/relgraph.hpp"
#include "relmarl/replay.hpp"

namespace relmarl {

/// Per-agent action-value vectors for one state.
using JointQ = std::vector<std::vector<double>>;

/// Maps per-agent rewards to the scalar team reward used in the TD target.
using TeamRewardFn = std::function<double(std::span<const double>)>;

/// Additive central value: sum of each agent's selected-action value.
double q_tot(std::span<const double> selected);

/// max over joint actions of the additive Q_tot. Additivity lets the
/// maximization split into a sum of per-agent maxima.
double joint_target_max(const JointQ& target_q);

/// Index of the largest value; ties go to the lowest index.
std::size_t greedy_action(std::span<const double> q);

/// Decentralized greedy policy: agent i reads only nets[i].
std::vector<std::size_t> greedy_joint_action(std::span<const Mlp> nets, std::span<const double> state);

/// TD error of one transition given its per-agent values:
/// r_team + gamma * joint_target_max(next) * (1 - terminal) - q_tot(chosen).
double td_error_from_values(double team_reward, double gamma, bool terminal, std::span<const double> chosen_q,
                            const JointQ& next_target_q);

/// Factorized TD errors of a batch, team reward from the relational network.
std::vector<double> td_error(std::span<const Transition> batch, std::span<const Mlp> nets,
                             std::span<const Mlp> targets, const RelationalNetwork& graph, double gamma);

/// Same, with an arbitrary team-reward function.
std::vector<double> td_error(std::span<const Transition> batch, std::span<const Mlp> nets,
                             std::span<const Mlp> targets, const TeamRewardFn& team_reward, double gamma);

}  // namespace relmarl
