#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "relmarl/evaluation.hpp"
#include "relmarl/experiment.hpp"
#include "relmarl/scenarios.hpp"
#include "relmarl/verify.hpp"

namespace relmarl::cli {
namespace {

struct RunOptions {
  std::optional<std::size_t> runs;
  std::optional<std::size_t> episodes;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::string out;
  bool quiet = false;
};

void add_run_options(CLI::App* sub, RunOptions& o) {
  sub->add_option("--runs", o.runs, "Number of independent seeded runs");
  sub->add_option("--episodes", o.episodes, "Training episodes per run");
  sub->add_option("--seed", o.seed, "Base seed; run i uses seed + i");
  sub->add_option("--threads", o.threads, "Runs trained concurrently (0: all cores)");
  sub->add_option("--out", o.out, "Output directory (overrides RELMARL_OUT and the config)");
  sub->add_flag("--quiet", o.quiet, "Suppress per-evaluation progress lines");
  sub->allow_extras();
}

// Leftover arguments must all be --key=value overrides.
void apply_extras(ExperimentConfig& cfg, const std::vector<std::string>& extras) {
  for (const std::string& arg : extras) {
    const auto eq = arg.find('=');
    if (!arg.starts_with("--") || eq == std::string::npos) {
      throw ConfigError("unexpected argument '" + arg + "'; overrides take the form --key=value");
    }
    apply_override(cfg, std::string_view(arg).substr(2, eq - 2), std::string_view(arg).substr(eq + 1));
  }
}

void apply_run_options(ExperimentConfig& cfg, const RunOptions& o) {
  if (o.runs) cfg.runs = *o.runs;
  if (o.episodes) cfg.training.episodes = *o.episodes;
  if (o.seed) cfg.base_seed = *o.seed;
  if (const char* env = std::getenv("RELMARL_OUT"); env != nullptr && *env != '\0') cfg.output = env;
  if (!o.out.empty()) cfg.output = o.out;
}

void print_table(std::ostream& out, const ExperimentConfig& cfg, const std::vector<AggregateRow>& table) {
  out << cfg.experiment << " (" << cfg.runs << " runs x " << cfg.training.episodes << " episodes)\n";
  for (const AggregateRow& row : table) {
    out << "  " << std::left << std::setw(8) << row.agent << std::right << std::fixed << std::setprecision(2)
        << std::setw(8) << row.mean;
    if (row.half_width) {
      out << " +/- " << *row.half_width;
    } else {
      out << " +/- n/a";
    }
    out << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

int execute(const ExperimentConfig& cfg, const RunOptions& o, std::ostream& out, std::ostream& err) {
  cfg.validate();
  RunProgress progress;
  if (!o.quiet) {
    progress = [&err](std::size_t run, const EvalRecord& r) {
      err << "run " << run << " episode " << r.episode << " collective " << r.collective << '\n';
    };
  }
  const ExperimentResult result = run_experiment(cfg, o.threads, progress);
  const auto files = write_experiment_outputs(cfg, result, cfg.output);
  print_table(out, cfg, result.table);
  out << "wrote " << files.size() << " files under " << cfg.output.string() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relationship-aware value decomposition workbench"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  RunOptions train_opts;
  std::string config_path;
  auto* train = app.add_subcommand("train", "Train runs from a config file");
  train->add_option("--config", config_path, "Experiment config file")->required();
  add_run_options(train, train_opts);

  auto* verify = app.add_subcommand("verify", "Run gradient, joint-max and equivalence checks");

  RunOptions repro_opts;
  std::string experiment_id, variant = "default", scale_text = "desk";
  bool print_config = false;
  auto* reproduce = app.add_subcommand("reproduce", "Run a published experiment");
  reproduce->add_option("experiment", experiment_id, "Experiment id")->required();
  reproduce->add_option("variant", variant, "Network variant");
  reproduce->add_option("scale", scale_text, "desk or full");
  reproduce->add_flag("--print-config", print_config, "Print the resolved config and exit");
  add_run_options(reproduce, repro_opts);

  std::string scenario;
  std::vector<std::string> net_paths;
  bool trace = false;
  auto* eval = app.add_subcommand("eval", "Greedy episode from saved checkpoints");
  eval->add_option("--scenario", scenario, "Scenario name")->required();
  eval->add_option("--net", net_paths, "Checkpoint per agent, in agent order")->required();
  eval->add_flag("--trace", trace, "Print the step trace as JSON lines");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }

  try {
    if (*train) {
      ExperimentConfig cfg = load_experiment_config(config_path);
      apply_extras(cfg, train->remaining());
      apply_run_options(cfg, train_opts);
      return execute(cfg, train_opts, out, err);
    }
    if (*reproduce) {
      ExperimentConfig cfg = reproduce_config(experiment_id, variant, parse_scale(scale_text));
      apply_extras(cfg, reproduce->remaining());
      apply_run_options(cfg, repro_opts);
      if (print_config) {
        out << serialize_experiment_config(cfg);
        return kOk;
      }
      return execute(cfg, repro_opts, out, err);
    }
    if (*verify) {
      const auto results = run_verification(out);
      const bool ok = std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
      return ok ? kOk : kVerification;
    }
    if (*eval) {
      auto env = make_environment(scenario);
      if (net_paths.size() != env->agent_count()) {
        throw ConfigError("scenario '" + scenario + "' needs " + std::to_string(env->agent_count()) +
                          " checkpoints, got " + std::to_string(net_paths.size()));
      }
      std::vector<Mlp> nets;
      for (const auto& p : net_paths) nets.push_back(load_net(p));
      for (const Mlp& net : nets) {
        if (net.input_size() != env->observation_size() || net.output_size() != env->action_count()) {
          throw ConfigError("checkpoint shape does not match scenario '" + scenario + "'");
        }
      }
      const GreedyEpisode ep = greedy_episode(*env, nets, trace);
      if (trace) write_trace(out, ep);
      for (std::size_t i = 0; i < ep.rewards.size(); ++i) {
        out << agent_label(i) << ' ' << ep.rewards[i] << '\n';
      }
      out << "collective " << q_tot(ep.rewards) << " steps " << ep.steps << '\n';
      return kOk;
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kValidation;
}

}  // namespace relmarl::cli
