#include "relmarl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include "json.hpp"

#include "text_util.hpp"

namespace relmarl {
namespace {

constexpr std::string_view kSeriesHeader = "run,episode,agent,reward,collective";
constexpr std::string_view kTableHeader = "agent,mean,half_width,runs";

std::size_t agent_index(std::string_view label) {
  static constexpr std::string_view kNames[] = {"red", "blue", "green", "yellow"};
  for (std::size_t i = 0; i < std::size(kNames); ++i) {
    if (label == kNames[i]) return i;
  }
  constexpr std::string_view kPrefix = "agent";
  if (label.starts_with(kPrefix)) {
    if (auto v = to_size(label.substr(kPrefix.size()))) return *v;
  }
  throw std::invalid_argument("unknown agent label '" + std::string(label) + "'");
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

EvalRecord make_record(std::size_t run, std::size_t episode, std::vector<double> rewards, const TeamRewardFn& team) {
  EvalRecord r;
  r.run = run;
  r.episode = episode;
  r.collective = q_tot(rewards);
  r.team = team ? team(rewards) : r.collective;
  r.rewards = std::move(rewards);
  return r;
}

GreedyEpisode greedy_episode(Environment& env, std::span<const Mlp> nets, bool keep_trace) {
  if (nets.size() != env.agent_count()) throw std::invalid_argument("greedy_episode: one network per agent required");
  env.reset();
  GreedyEpisode ep;
  ep.rewards.assign(env.agent_count(), 0.0);
  while (!env.done()) {
    const auto actions = greedy_joint_action(nets, env.observe());
    StepOutcome out = env.step(actions);
    for (std::size_t i = 0; i < out.rewards.size(); ++i) ep.rewards[i] += out.rewards[i];
    ++ep.steps;
    if (keep_trace) ep.trace.push_back({env.time_step(), env.agent_cells(), actions, out.rewards});
  }
  return ep;
}

std::vector<double> greedy_eval(const Environment& env, std::span<const Mlp> nets) {
  auto copy = env.clone();
  return greedy_episode(*copy, nets).rewards;
}

void write_trace(std::ostream& os, const GreedyEpisode& episode) {
  for (const TraceStep& s : episode.trace) {
    nlohmann::json line;
    line["step"] = s.step;
    auto cells = nlohmann::json::array();
    for (const Cell& c : s.cells) cells.push_back({c.col, c.row});
    line["cells"] = std::move(cells);
    line["actions"] = s.actions;
    line["rewards"] = s.rewards;
    os << line.dump() << '\n';
  }
}

std::string agent_label(std::size_t agent) {
  static constexpr std::string_view kNames[] = {"red", "blue", "green", "yellow"};
  if (agent < std::size(kNames)) return std::string(kNames[agent]);
  return "agent" + std::to_string(agent);
}

double t_critical_95(std::size_t dof) {
  if (dof == 0) throw std::invalid_argument("t_critical_95: zero degrees of freedom");
  const boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(boost::math::complement(dist, 0.025));
}

AggregateRow summarize(std::string agent, std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("summarize: no samples");
  AggregateRow row;
  row.agent = std::move(agent);
  row.samples = samples.size();
  // Shifted sums keep constant inputs exact: every deviation is zero.
  const double pivot = samples.front();
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double x : samples) {
    sum += x - pivot;
    sum_sq += (x - pivot) * (x - pivot);
  }
  const auto n = static_cast<double>(samples.size());
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  row.mean = std::clamp(pivot + sum / n, *lo, *hi);
  if (samples.size() >= 2) {
    const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
    row.half_width = t_critical_95(samples.size() - 1) * std::sqrt(var) / std::sqrt(n);
  }
  return row;
}

std::vector<AggregateRow> aggregate(std::span<const EvalRecord> records) {
  std::map<std::size_t, const EvalRecord*> last_per_run;
  for (const EvalRecord& r : records) {
    auto& slot = last_per_run[r.run];
    if (slot == nullptr || r.episode > slot->episode) slot = &r;
  }
  if (last_per_run.empty()) return {};
  const std::size_t agents = last_per_run.begin()->second->rewards.size();
  std::vector<AggregateRow> rows;
  for (std::size_t a = 0; a < agents; ++a) {
    std::vector<double> samples;
    for (const auto& [run, rec] : last_per_run) {
      if (rec->rewards.size() != agents) throw std::invalid_argument("aggregate: runs differ in agent count");
      samples.push_back(rec->rewards[a]);
    }
    rows.push_back(summarize(agent_label(a), samples));
  }
  return rows;
}

std::string series_csv(std::span<const EvalRecord> records, std::string_view provenance) {
  std::string out;
  if (!provenance.empty()) out += "# " + std::string(provenance) + "\n";
  out += std::string(kSeriesHeader) + "\n";
  for (const EvalRecord& r : records) {
    for (std::size_t a = 0; a < r.rewards.size(); ++a) {
      out += std::to_string(r.run) + "," + std::to_string(r.episode) + "," + agent_label(a) + "," +
             format_double(r.rewards[a]) + "," + format_double(r.collective) + "\n";
    }
  }
  return out;
}

std::string table_csv(std::span<const AggregateRow> rows, std::string_view provenance) {
  std::string out;
  if (!provenance.empty()) out += "# " + std::string(provenance) + "\n";
  out += std::string(kTableHeader) + "\n";
  for (const AggregateRow& r : rows) {
    out += r.agent + "," + format_double(r.mean) + "," + (r.half_width ? format_double(*r.half_width) : "n/a") + "," +
           std::to_string(r.samples) + "\n";
  }
  return out;
}

std::vector<EvalRecord> parse_series_csv(std::string_view text, const TeamRewardFn& team) {
  std::vector<EvalRecord> records;
  bool seen_header = false;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (!seen_header) {
      if (line != kSeriesHeader) throw std::invalid_argument("series csv: unexpected header '" + std::string(line) + "'");
      seen_header = true;
      continue;
    }
    const auto fields = split(line, ',');
    auto fail = [&] { return std::invalid_argument("series csv: malformed line " + std::to_string(line_no)); };
    if (fields.size() != 5) throw fail();
    const auto run = to_size(fields[0]);
    const auto episode = to_size(fields[1]);
    const auto reward = to_double(fields[3]);
    const auto collective = to_double(fields[4]);
    if (!run || !episode || !reward || !collective) throw fail();
    const std::size_t agent = agent_index(fields[2]);

    if (records.empty() || records.back().run != *run || records.back().episode != *episode) {
      records.push_back({*run, *episode, {}, *collective, 0.0});
    }
    EvalRecord& rec = records.back();
    if (agent != rec.rewards.size()) throw fail();
    rec.rewards.push_back(*reward);
  }
  if (!seen_header) throw std::invalid_argument("series csv: missing header");
  for (EvalRecord& r : records) r.team = team ? team(r.rewards) : r.collective;
  return records;
}

ReportFiles emit_report(std::span<const EvalRecord> records, const std::filesystem::path& dir,
                        std::string_view experiment, std::string_view provenance) {
  std::filesystem::create_directories(dir);
  ReportFiles files{dir / (std::string(experiment) + "_series.csv"), dir / (std::string(experiment) + "_table.csv")};
  write_file(files.series, series_csv(records, provenance));
  const auto rows = aggregate(records);
  write_file(files.table, table_csv(rows, provenance));
  return files;
}

}  // namespace relmarl
