#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "relmarl/evaluation.hpp"
#include "relmarl/relgraph.hpp"
#include "relmarl/trainer.hpp"

namespace relmarl {

/// Invalid experiment configuration text or override.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A complete experiment: scenario, relational network, training
/// hyperparameters and how many seeded runs to make.
///
/// Text form is sectioned key = value:
///
///     [scenario]
///     name = rc
///     [network]
///     agents = 2
///     edge = 0 0 1
///     edge = 0 1 0.5
///     [training]
///     episodes = 5000
///     ...
///     [harness]
///     experiment = rc_fig3b
///     runs = 3
///     base_seed = 42
///     output = out
///
/// Run i trains with seed base_seed + i.
struct ExperimentConfig {
  std::string experiment = "experiment";
  std::string scenario;
  std::optional<RelationalNetwork> network;
  TrainConfig training;
  std::size_t runs = 10;
  std::uint64_t base_seed = 42;
  std::filesystem::path output = "out";

  /// Scenario exists, network present and sized to the scenario, training valid.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

ExperimentConfig parse_experiment_config(std::string_view text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string serialize_experiment_config(const ExperimentConfig& config);

/// Applies one override. `key` is either "section.key" or a bare key that
/// is unique across sections (episodes, runs, lr, ...); "network" takes
/// the compact "agents=N; s->d:w, ..." form and replaces the whole graph.
void apply_override(ExperimentConfig& config, std::string_view key, std::string_view value);

enum class Scale { desk, full };

Scale parse_scale(std::string_view text);

/// Ids accepted by reproduce_config.
std::vector<std::string> experiment_ids();
/// Network variants valid for `id` ("default" is always accepted too).
std::vector<std::string> experiment_variants(std::string_view id);

/// Shipped configuration of a published experiment. Throws ConfigError
/// naming the valid ids or variants.
ExperimentConfig reproduce_config(std::string_view id, std::string_view variant, Scale scale);

struct ExperimentResult {
  std::vector<RunArtifacts> runs;
  std::vector<EvalRecord> records;  ///< all runs, run-major
  std::vector<AggregateRow> table;
};

using RunProgress = std::function<void(std::size_t run, const EvalRecord& record)>;

/// Trains config.runs independent runs on up to `threads` threads (0 picks
/// the hardware concurrency). Results do not depend on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t threads = 1,
                                const RunProgress& progress = {});

/// Provenance line written at the top of every output file.
std::string provenance_line(const ExperimentConfig& config);

/// Writes the series and table CSVs into `dir`, plus per run a
/// `<experiment>_run<k>/` directory with training.csv and the checkpoints
/// agent<i>_<episode>.qnet (final networks and any freeze snapshot).
std::vector<std::filesystem::path> write_experiment_outputs(const ExperimentConfig& config,
                                                            const ExperimentResult& result,
                                                            const std::filesystem::path& dir);

}  // namespace relmarl
