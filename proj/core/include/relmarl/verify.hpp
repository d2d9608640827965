#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "relmarl/neural.hpp"

namespace relmarl {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double max_error = 0.0;  ///< largest observed error, meaning depends on the check
};

/// Analytic gradient of upstream * Q(state)[action] with respect to every
/// parameter. `backward` is the production implementation.
using GradientFn = std::function<Gradients(const Mlp&, std::span<const double>, std::size_t, double)>;

struct GradientCheckOptions {
  std::size_t nets = 50;
  std::size_t max_dim = 6;
  double step = 1e-5;
  double rel_tol = 1e-4;
  double abs_floor = 1e-7;
  std::uint64_t seed = 7;
};

/// Compares `grad` against central finite differences on random small
/// networks. A component fails when both its absolute difference exceeds
/// the floor and its relative error exceeds the tolerance. max_error is the
/// largest relative error among components larger than the floor.
CheckResult check_gradients(const GradientFn& grad = backward, const GradientCheckOptions& options = {});

/// joint_target_max and greedy_joint_action against exhaustive search over
/// every joint action, for `instances` random 2 to 4 agent problems.
CheckResult check_factorized_max(std::size_t instances = 1000, std::uint64_t seed = 11);

/// Trains on RC with the self-interest graph and with a plain sum of
/// rewards under the same seed; the parameters must agree bit for bit.
CheckResult check_vdn_equivalence(std::size_t episodes = 500, std::uint64_t seed = 42);

/// Runs every check above, printing one line each to `os`.
std::vector<CheckResult> run_verification(std::ostream& os);

}  // namespace relmarl
