#include "relmarl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "relmarl/mixer.hpp"
#include "relmarl/relgraph.hpp"
#include "relmarl/rng.hpp"
#include "relmarl/scenarios.hpp"
#include "relmarl/trainer.hpp"

namespace relmarl {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double selected_output(const Mlp& net, std::span<const double> state, std::size_t action) {
  return forward(net, state)[action];
}

// Smallest |pre-activation| over all hidden units; a finite difference that
// straddles a ReLU kink measures nothing useful.
double kink_margin(const Mlp& net, std::span<const double> state) {
  std::vector<double> x(state.begin(), state.end());
  double margin = INFINITY;
  const auto layers = net.layers();
  for (std::size_t k = 0; k + 1 < layers.size(); ++k) {
    const DenseLayer& l = layers[k];
    std::vector<double> y(l.bias);
    for (std::size_t i = 0; i < l.inputs; ++i) {
      for (std::size_t o = 0; o < l.outputs; ++o) y[o] += x[i] * l.weights[i * l.outputs + o];
    }
    for (double& v : y) {
      margin = std::min(margin, std::abs(v));
      v = std::max(v, 0.0);
    }
    x = std::move(y);
  }
  return margin;
}

}  // namespace

CheckResult check_gradients(const GradientFn& grad, const GradientCheckOptions& opt) {
  CheckResult res{"gradient finite differences", true, {}, 0.0};
  Rng rng(opt.seed);
  std::size_t components = 0;
  std::size_t failures = 0;
  for (std::size_t n = 0; n < opt.nets; ++n) {
    const std::size_t depth = 1 + rng.uniform_index(3);
    std::vector<std::size_t> hidden;
    for (std::size_t d = 0; d < depth; ++d) hidden.push_back(1 + rng.uniform_index(opt.max_dim));
    const std::size_t inputs = 1 + rng.uniform_index(opt.max_dim);
    const std::size_t actions = 1 + rng.uniform_index(opt.max_dim);
    Mlp net = init_net(inputs, hidden, actions, rng);
    // Nonzero biases so the check also covers them.
    for (DenseLayer& l : net.layers()) {
      for (double& b : l.bias) b = rng.uniform(-0.5, 0.5);
    }
    std::vector<double> state(inputs);
    do {
      for (double& s : state) s = rng.uniform(-1.0, 1.0);
    } while (kink_margin(net, state) < 1e-3);
    const std::size_t action = rng.uniform_index(actions);
    const double upstream = rng.uniform(-2.0, 2.0);

    const Gradients analytic = grad(net, state, action, upstream);
    if (analytic.layers.size() != net.layers().size()) {
      res.passed = false;
      res.detail = "gradient has wrong layer count";
      return res;
    }
    for (std::size_t k = 0; k < net.layers().size(); ++k) {
      auto check_param = [&](double& p, double a) {
        const double saved = p;
        p = saved + opt.step;
        const double plus = selected_output(net, state, action);
        p = saved - opt.step;
        const double minus = selected_output(net, state, action);
        p = saved;
        const double numeric = upstream * (plus - minus) / (2.0 * opt.step);
        const double diff = std::abs(a - numeric);
        ++components;
        const double scale = std::max(std::abs(a), std::abs(numeric));
        if (scale <= opt.abs_floor) return;
        const double rel = diff / scale;
        res.max_error = std::max(res.max_error, rel);
        if (diff > opt.abs_floor && rel > opt.rel_tol) ++failures;
      };
      DenseLayer& layer = net.layers()[k];
      const DenseLayer& g = analytic.layers[k];
      if (g.weights.size() != layer.weights.size() || g.bias.size() != layer.bias.size()) {
        res.passed = false;
        res.detail = "gradient shape differs from the network";
        return res;
      }
      for (std::size_t i = 0; i < layer.weights.size(); ++i) check_param(layer.weights[i], g.weights[i]);
      for (std::size_t i = 0; i < layer.bias.size(); ++i) check_param(layer.bias[i], g.bias[i]);
    }
  }
  res.passed = failures == 0;
  res.detail = std::to_string(components) + " components over " + std::to_string(opt.nets) + " nets, " +
               std::to_string(failures) + " outside tolerance, max relative error " + fmt(res.max_error);
  return res;
}

CheckResult check_factorized_max(std::size_t instances, std::uint64_t seed) {
  CheckResult res{"factorized joint max", true, {}, 0.0};
  Rng rng(seed);
  constexpr std::size_t kActions = 5;
  std::size_t mismatches = 0;
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t agents = 2 + rng.uniform_index(3);
    // Every other instance uses small integers so ties are common.
    const bool integral = t % 2 == 1;
    JointQ q(agents, std::vector<double>(kActions));
    std::vector<Mlp> nets;
    for (auto& row : q) {
      for (double& v : row) v = integral ? static_cast<double>(rng.uniform_index(3)) : rng.uniform(-10.0, 10.0);
      Mlp net({1, kActions});
      net.layers()[0].bias = row;
      nets.push_back(std::move(net));
    }

    double best = -INFINITY;
    std::vector<std::size_t> best_joint;
    std::vector<std::size_t> joint(agents, 0);
    for (;;) {
      double total = 0.0;
      for (std::size_t i = 0; i < agents; ++i) total += q[i][joint[i]];
      if (total > best) best = total, best_joint = joint;
      std::size_t i = agents;
      while (i > 0 && ++joint[i - 1] == kActions) joint[--i] = 0;
      if (i == 0) break;
    }
    const std::vector<double> probe{0.0};
    if (joint_target_max(q) != best || greedy_joint_action(nets, probe) != best_joint) {
      ++mismatches;
      res.max_error = std::max(res.max_error, std::abs(joint_target_max(q) - best));
    }
  }
  res.passed = mismatches == 0;
  res.detail = std::to_string(instances) + " instances, " + std::to_string(mismatches) + " mismatches";
  return res;
}

CheckResult check_vdn_equivalence(std::size_t episodes, std::uint64_t seed) {
  CheckResult res{"self-interest graph equals VDN", true, {}, 0.0};
  const auto env = make_environment("rc");
  TrainConfig cfg;
  cfg.episodes = episodes;
  cfg.seed = seed;
  const auto graph = RelationalNetwork::self_interest(env->agent_count());
  const RunArtifacts relational = train_run(*env, graph, cfg);
  const RunArtifacts plain = train_run(*env, TeamRewardFn(q_tot), cfg);

  std::size_t differing = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < plain.nets.size(); ++i) {
    const auto a = relational.nets[i].layers();
    const auto b = plain.nets[i].layers();
    for (std::size_t k = 0; k < a.size(); ++k) {
      for (std::size_t p = 0; p < a[k].weights.size(); ++p, ++total) {
        const double d = std::abs(a[k].weights[p] - b[k].weights[p]);
        res.max_error = std::max(res.max_error, d);
        differing += a[k].weights[p] != b[k].weights[p];
      }
      for (std::size_t p = 0; p < a[k].bias.size(); ++p, ++total) {
        const double d = std::abs(a[k].bias[p] - b[k].bias[p]);
        res.max_error = std::max(res.max_error, d);
        differing += a[k].bias[p] != b[k].bias[p];
      }
    }
  }
  res.passed = differing == 0 && relational.nets == plain.nets;
  res.detail = std::to_string(episodes) + " episodes, " + std::to_string(differing) + " of " +
               std::to_string(total) + " parameters differ";
  return res;
}

std::vector<CheckResult> run_verification(std::ostream& os) {
  std::vector<CheckResult> results;
  results.push_back(check_gradients());
  os << (results.back().passed ? "PASS " : "FAIL ") << results.back().name << ": " << results.back().detail << '\n';
  results.push_back(check_factorized_max());
  os << (results.back().passed ? "PASS " : "FAIL ") << results.back().name << ": " << results.back().detail << '\n';
  results.push_back(check_vdn_equivalence());
  os << (results.back().passed ? "PASS " : "FAIL ") << results.back().name << ": " << results.back().detail << '\n';
  return results;
}

}  // namespace relmarl
