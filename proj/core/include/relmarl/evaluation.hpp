#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relmarl/env.hpp"
#include "relmarl/mixer.hpp"
#include "relmarl/neural.hpp"
#include "relmarl/relgraph.hpp"

namespace relmarl {

/// One greedy measurement taken during training.
struct EvalRecord {
  std::size_t run = 0;
  std::size_t episode = 0;
  std::vector<double> rewards;  ///< per agent, undiscounted
  double collective = 0.0;      ///< plain sum of `rewards`
  double team = 0.0;            ///< team reward under the run's graph

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

/// Collective (plain sum, agent order) and graph-weighted team reward.
EvalRecord make_record(std::size_t run, std::size_t episode, std::vector<double> rewards, const TeamRewardFn& team);

struct TraceStep {
  int step = 0;
  std::vector<Cell> cells;  ///< positions after the step
  std::vector<std::size_t> actions;
  std::vector<double> rewards;
};

struct GreedyEpisode {
  std::vector<double> rewards;
  int steps = 0;
  std::vector<TraceStep> trace;
};

/// Resets `env` and plays one episode with every agent acting greedily on
/// its own network. Nothing is learned or stored.
GreedyEpisode greedy_episode(Environment& env, std::span<const Mlp> nets, bool keep_trace = false);

/// Per-agent rewards of one greedy episode on a fresh copy of `env`.
std::vector<double> greedy_eval(const Environment& env, std::span<const Mlp> nets);

/// Writes the trace as JSON lines:
/// {"step":1,"cells":[[col,row],...],"actions":[...],"rewards":[...]}
void write_trace(std::ostream& os, const GreedyEpisode& episode);

/// red, blue, green, yellow, then agent<i>.
std::string agent_label(std::size_t agent);

struct AggregateRow {
  std::string agent;
  double mean = 0.0;
  std::optional<double> half_width;  ///< empty with fewer than two samples
  std::size_t samples = 0;

  friend bool operator==(const AggregateRow&, const AggregateRow&) = default;
};

/// Two-sided 95% Student-t critical value for `dof` degrees of freedom.
double t_critical_95(std::size_t dof);

AggregateRow summarize(std::string agent, std::span<const double> samples);

/// Mean and 95% t-interval per agent over each run's final record.
std::vector<AggregateRow> aggregate(std::span<const EvalRecord> records);

/// Series CSV: optional "# ..." provenance line, then
/// "run,episode,agent,reward,collective" and one row per record and agent.
std::string series_csv(std::span<const EvalRecord> records, std::string_view provenance = {});
/// Table CSV: provenance line, then "agent,mean,half_width,runs".
std::string table_csv(std::span<const AggregateRow> rows, std::string_view provenance = {});

/// Inverse of series_csv. `team` fills EvalRecord::team, which the file
/// does not store; without it team is set to the collective reward.
std::vector<EvalRecord> parse_series_csv(std::string_view text, const TeamRewardFn& team = {});

struct ReportFiles {
  std::filesystem::path series;
  std::filesystem::path table;
};

/// Writes <experiment>_series.csv and <experiment>_table.csv into `dir`.
ReportFiles emit_report(std::span<const EvalRecord> records, const std::filesystem::path& dir,
                        std::string_view experiment, std::string_view provenance = {});

}  // namespace relmarl
