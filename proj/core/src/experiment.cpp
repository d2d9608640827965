#include "relmarl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "relmarl/scenarios.hpp"
#include "text_util.hpp"

namespace relmarl {
namespace {

std::size_t as_size(std::string_view key, std::string_view value) {
  const auto v = to_size(trim(value));
  if (!v) throw ConfigError("'" + std::string(key) + "' expects a non-negative integer, got '" + std::string(value) + "'");
  return *v;
}

double as_double(std::string_view key, std::string_view value) {
  const auto v = to_double(trim(value));
  if (!v) throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
  return *v;
}

std::vector<std::size_t> as_size_list(std::string_view key, std::string_view value) {
  std::vector<std::size_t> out;
  for (std::string_view part : split(value, ',')) out.push_back(as_size(key, part));
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

struct KeySpec {
  std::string_view section;
  std::string_view name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;  // empty result: omit
};

FreezeDirective& freeze_slot(ExperimentConfig& c) {
  if (!c.training.freeze) c.training.freeze = FreezeDirective{};
  return *c.training.freeze;
}

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"scenario", "name", [](ExperimentConfig& c, std::string_view v) { c.scenario = std::string(trim(v)); },
       [](const ExperimentConfig& c) { return c.scenario; }},
      {"training", "episodes", [](ExperimentConfig& c, std::string_view v) { c.training.episodes = as_size("episodes", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.training.episodes); }},
      {"training", "updates_per_episode",
       [](ExperimentConfig& c, std::string_view v) { c.training.updates_per_episode = as_size("updates_per_episode", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.training.updates_per_episode); }},
      {"training", "batch", [](ExperimentConfig& c, std::string_view v) { c.training.batch = as_size("batch", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.training.batch); }},
      {"training", "replay_capacity",
       [](ExperimentConfig& c, std::string_view v) { c.training.replay_capacity = as_size("replay_capacity", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.training.replay_capacity); }},
      {"training", "lr", [](ExperimentConfig& c, std::string_view v) { c.training.learning_rate = as_double("lr", v); },
       [](const ExperimentConfig& c) { return format_double(c.training.learning_rate); }},
      {"training", "gamma", [](ExperimentConfig& c, std::string_view v) { c.training.gamma = as_double("gamma", v); },
       [](const ExperimentConfig& c) { return format_double(c.training.gamma); }},
      {"training", "target_sync_every",
       [](ExperimentConfig& c, std::string_view v) { c.training.target_sync_every = as_size("target_sync_every", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.training.target_sync_every); }},
      {"training", "epsilon_start",
       [](ExperimentConfig& c, std::string_view v) { c.training.epsilon.start = as_double("epsilon_start", v); },
       [](const ExperimentConfig& c) { return format_double(c.training.epsilon.start); }},
      {"training", "epsilon_end",
       [](ExperimentConfig& c, std::string_view v) { c.training.epsilon.end = as_double("epsilon_end", v); },
       [](const ExperimentConfig& c) { return format_double(c.training.epsilon.end); }},
      {"training", "epsilon_anneal_fraction",
       [](ExperimentConfig& c, std::string_view v) {
         c.training.epsilon.anneal_fraction = as_double("epsilon_anneal_fraction", v);
       },
       [](const ExperimentConfig& c) { return format_double(c.training.epsilon.anneal_fraction); }},
      {"training", "eval_every", [](ExperimentConfig& c, std::string_view v) { c.training.eval_every = as_size("eval_every", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.training.eval_every); }},
      {"training", "hidden", [](ExperimentConfig& c, std::string_view v) { c.training.hidden = as_size_list("hidden", v); },
       [](const ExperimentConfig& c) { return join_sizes(c.training.hidden); }},
      {"training", "freeze_agent",
       [](ExperimentConfig& c, std::string_view v) { freeze_slot(c).agent = as_size("freeze_agent", v); },
       [](const ExperimentConfig& c) { return c.training.freeze ? std::to_string(c.training.freeze->agent) : std::string(); }},
      {"training", "freeze_at",
       [](ExperimentConfig& c, std::string_view v) { freeze_slot(c).at_episode = as_size("freeze_at", v); },
       [](const ExperimentConfig& c) {
         return c.training.freeze ? std::to_string(c.training.freeze->at_episode) : std::string();
       }},
      {"harness", "experiment", [](ExperimentConfig& c, std::string_view v) { c.experiment = std::string(trim(v)); },
       [](const ExperimentConfig& c) { return c.experiment; }},
      {"harness", "runs", [](ExperimentConfig& c, std::string_view v) { c.runs = as_size("runs", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.runs); }},
      {"harness", "base_seed", [](ExperimentConfig& c, std::string_view v) { c.base_seed = as_size("base_seed", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.base_seed); }},
      {"harness", "output", [](ExperimentConfig& c, std::string_view v) { c.output = std::string(trim(v)); },
       [](const ExperimentConfig& c) { return c.output.string(); }},
  };
  return table;
}

const KeySpec* find_key(std::string_view section, std::string_view name) {
  for (const KeySpec& k : key_table()) {
    if (k.section == section && k.name == name) return &k;
  }
  return nullptr;
}

struct NetworkDraft {
  std::optional<std::size_t> agents;
  std::vector<Edge> edges;
  bool touched = false;
};

void network_line(NetworkDraft& draft, std::string_view key, std::string_view value, std::size_t line_no) {
  draft.touched = true;
  if (key == "agents") {
    draft.agents = as_size("agents", value);
  } else if (key == "edge") {
    std::istringstream is{std::string(value)};
    std::string src, dst, weight, extra;
    if (!(is >> src >> dst >> weight) || (is >> extra)) {
      throw ConfigError("line " + std::to_string(line_no) + ": edge expects 'src dst weight'");
    }
    draft.edges.push_back({as_size("edge source", src), as_size("edge target", dst), as_double("edge weight", weight)});
  } else {
    throw ConfigError("line " + std::to_string(line_no) + ": unknown network key '" + std::string(key) + "'");
  }
}

struct Budget {
  std::size_t episodes;
  std::size_t runs;
  std::optional<std::size_t> freeze_at;
};

struct PublishedExperiment {
  std::string_view id;
  std::string_view scenario;
  std::vector<std::string_view> variants;  // first entry is the default
  Budget desk;
  Budget full;
  std::optional<std::size_t> freeze_agent;
};

const std::vector<PublishedExperiment>& published_experiments() {
  static const std::vector<PublishedExperiment> list = {
      {"rc", "rc", {"fig3b", "fig3c", "fig3a"}, {5000, 3, {}}, {10000, 10, {}}, {}},
      {"rc-rm", "rc-rm", {"fig3c", "fig3b", "fig3a"}, {8000, 3, {}}, {25000, 10, {}}, {}},
      {"drc-rm", "drc-rm", {"fig3c", "fig3a"}, {10000, 3, {}}, {40000, 10, {}}, {}},
      {"rc-bc", "rc-bc", {"fig3b", "fig3a"}, {8000, 3, {}}, {15000, 10, {}}, {}},
      {"switch2", "switch2", {"fig3b", "fig3c", "fig3a"}, {5000, 3, {}}, {10000, 10, {}}, {}},
      {"switch3", "switch3", {"fig3e", "fig3f", "fig3g", "fig3a"}, {5000, 3, {}}, {10000, 10, {}}, {}},
      {"switch4", "switch4", {"fig3i", "fig3a"}, {5000, 3, {}}, {10000, 10, {}}, {}},
      {"switch4-frozen", "switch4", {"fig3i"}, {3500, 2, 500}, {10000, 10, 1000}, 3},
  };
  return list;
}

// Every agent keeps a weight-1 self-loop; each priority edge carries 0.5.
RelationalNetwork variant_network(std::string_view variant, std::size_t agents) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < agents; ++i) edges.push_back({i, i, 1.0});
  constexpr std::size_t red = 0, blue = 1, green = 2, yellow = 3;
  auto add = [&](std::size_t s, std::size_t d) { edges.push_back({s, d, 0.5}); };
  if (variant == "fig3a") {
  } else if (variant == "fig3b") {
    add(red, blue);
  } else if (variant == "fig3c") {
    add(blue, red);
  } else if (variant == "fig3e") {
    add(blue, red);
    add(green, red);
  } else if (variant == "fig3f") {
    add(red, blue);
    add(green, blue);
  } else if (variant == "fig3g") {
    add(red, green);
    add(blue, green);
    add(red, blue);
  } else if (variant == "fig3i") {
    add(red, yellow);
    add(blue, yellow);
    add(green, yellow);
  } else {
    throw ConfigError("unknown network variant '" + std::string(variant) + "'");
  }
  return RelationalNetwork(agents, std::move(edges));
}

const PublishedExperiment& find_experiment(std::string_view id) {
  for (const auto& e : published_experiments()) {
    if (e.id == id) return e;
  }
  std::string valid;
  for (const auto& e : published_experiments()) valid += (valid.empty() ? "" : ", ") + std::string(e.id);
  throw ConfigError("unknown experiment '" + std::string(id) + "'; valid ids: " + valid);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

void ExperimentConfig::validate() const {
  if (scenario.empty()) throw ConfigError("config is missing the scenario name");
  std::unique_ptr<Environment> env;
  try {
    env = make_environment(scenario);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!network) throw ConfigError("config is missing the [network] section");
  if (network->agent_count() != env->agent_count()) {
    throw ConfigError("network has " + std::to_string(network->agent_count()) + " agents, scenario '" + scenario +
                      "' has " + std::to_string(env->agent_count()));
  }
  if (runs == 0) throw ConfigError("runs must be positive");
  if (experiment.empty() || experiment.find('/') != std::string::npos) {
    throw ConfigError("experiment name must be a non-empty file-name stem");
  }
  if (training.freeze && training.freeze->agent >= env->agent_count()) {
    throw ConfigError("freeze_agent out of range for scenario '" + scenario + "'");
  }
  try {
    training.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig parse_experiment_config(std::string_view text) {
  ExperimentConfig cfg;
  NetworkDraft draft;
  std::string section;
  std::vector<std::string> seen;
  bool freeze_agent = false, freeze_at = false;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "scenario" && section != "network" && section != "training" && section != "harness") {
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": key outside any section");
    if (section == "network") {
      network_line(draft, key, value, line_no);
      continue;
    }
    const KeySpec* spec = find_key(section, key);
    if (spec == nullptr) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "' in [" + section + "]");
    }
    const std::string full = section + "." + std::string(key);
    if (std::find(seen.begin(), seen.end(), full) != seen.end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + full + "'");
    }
    seen.push_back(full);
    freeze_agent |= key == "freeze_agent";
    freeze_at |= key == "freeze_at";
    spec->set(cfg, value);
  }
  if (freeze_agent != freeze_at) throw ConfigError("freeze_agent and freeze_at must be given together");
  if (draft.touched) {
    if (!draft.agents) throw ConfigError("[network] is missing 'agents'");
    cfg.network = RelationalNetwork(*draft.agents, std::move(draft.edges));
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_experiment_config(ss.str());
}

std::string serialize_experiment_config(const ExperimentConfig& config) {
  std::string out;
  std::string_view current;
  auto emit_section = [&](std::string_view section) {
    if (current == section) return;
    out += std::string(out.empty() ? "" : "\n") + "[" + std::string(section) + "]\n";
    current = section;
  };
  for (const KeySpec& k : key_table()) {
    if (k.section == "training" && current != "training") {
      emit_section("network");
      if (config.network) {
        out += "agents = " + std::to_string(config.network->agent_count()) + "\n";
        for (const Edge& e : config.network->edges()) {
          out += "edge = " + std::to_string(e.src) + " " + std::to_string(e.dst) + " " + format_double(e.weight) + "\n";
        }
      }
    }
    const std::string value = k.get(config);
    if (value.empty()) continue;
    emit_section(k.section);
    out += std::string(k.name) + " = " + value + "\n";
  }
  return out;
}

void apply_override(ExperimentConfig& config, std::string_view key, std::string_view value) {
  std::string_view section;
  std::string_view name = key;
  if (const auto dot = key.find('.'); dot != std::string_view::npos) {
    section = key.substr(0, dot);
    name = key.substr(dot + 1);
  }
  if (name == "network" || (section == "network" && name == "text")) {
    try {
      config.network = parse_network(value);
    } catch (const GraphError& e) {
      throw ConfigError(e.what());
    }
    return;
  }
  if (name == "scenario" && section.empty()) name = "name", section = "scenario";
  if (name == "seed" && section.empty()) name = "base_seed";
  if (name == "learning_rate") name = "lr";
  if (name == "freeze" && value == "none") {
    config.training.freeze.reset();
    return;
  }
  const KeySpec* match = nullptr;
  for (const KeySpec& k : key_table()) {
    if (k.name == name && (section.empty() || k.section == section)) {
      if (match != nullptr) throw ConfigError("ambiguous override key '" + std::string(key) + "'");
      match = &k;
    }
  }
  if (match == nullptr) throw ConfigError("unknown override key '" + std::string(key) + "'");
  match->set(config, value);
}

Scale parse_scale(std::string_view text) {
  if (text == "desk") return Scale::desk;
  if (text == "full") return Scale::full;
  throw ConfigError("unknown scale '" + std::string(text) + "'; valid: desk, full");
}

std::vector<std::string> experiment_ids() {
  std::vector<std::string> ids;
  for (const auto& e : published_experiments()) ids.emplace_back(e.id);
  return ids;
}

std::vector<std::string> experiment_variants(std::string_view id) {
  const auto& e = find_experiment(id);
  return {e.variants.begin(), e.variants.end()};
}

ExperimentConfig reproduce_config(std::string_view id, std::string_view variant, Scale scale) {
  const PublishedExperiment& e = find_experiment(id);
  const std::string_view chosen = variant == "default" ? e.variants.front() : variant;
  if (std::find(e.variants.begin(), e.variants.end(), chosen) == e.variants.end()) {
    std::string valid = "default";
    for (auto v : e.variants) valid += ", " + std::string(v);
    throw ConfigError("experiment '" + std::string(id) + "' has no variant '" + std::string(variant) +
                      "'; valid: " + valid);
  }
  const std::size_t agents = make_environment(e.scenario)->agent_count();
  const Budget& budget = scale == Scale::desk ? e.desk : e.full;

  ExperimentConfig cfg;
  cfg.experiment = std::string(id) + "_" + std::string(chosen);
  cfg.scenario = std::string(e.scenario);
  cfg.network = variant_network(chosen, agents);
  cfg.training.episodes = budget.episodes;
  cfg.runs = budget.runs;
  if (e.freeze_agent && budget.freeze_at) cfg.training.freeze = FreezeDirective{*e.freeze_agent, *budget.freeze_at};
  return cfg;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t threads, const RunProgress& progress) {
  config.validate();
  const auto env = make_environment(config.scenario);
  const RelationalNetwork& graph = *config.network;

  ExperimentResult result;
  result.runs.resize(config.runs);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, config.runs);

  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t run = next++; run < config.runs; run = next++) {
      try {
        TrainConfig tc = config.training;
        tc.seed = config.base_seed + run;
        TrainObserver obs;
        if (progress) {
          obs.on_eval = [&, run](const EvalRecord& r) {
            const std::lock_guard lock(progress_mutex);
            progress(run, r);
          };
        }
        result.runs[run] = train_run(*env, graph, tc, run, obs);
      } catch (...) {
        const std::lock_guard lock(progress_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (const RunArtifacts& run : result.runs) {
    result.records.insert(result.records.end(), run.evals.begin(), run.evals.end());
  }
  result.table = aggregate(result.records);
  return result;
}

std::string provenance_line(const ExperimentConfig& config) {
  return "experiment=" + config.experiment + " scenario=" + config.scenario +
         " base_seed=" + std::to_string(config.base_seed) + " runs=" + std::to_string(config.runs) +
         " episodes=" + std::to_string(config.training.episodes) +
         " network=\"" + (config.network ? config.network->to_string() : std::string()) + "\"";
}

std::vector<std::filesystem::path> write_experiment_outputs(const ExperimentConfig& config,
                                                            const ExperimentResult& result,
                                                            const std::filesystem::path& dir) {
  const std::string provenance = provenance_line(config);
  const ReportFiles report = emit_report(result.records, dir, config.experiment, provenance);
  std::vector<std::filesystem::path> written{report.series, report.table};

  for (std::size_t run = 0; run < result.runs.size(); ++run) {
    const RunArtifacts& art = result.runs[run];
    const auto run_dir = dir / (config.experiment + "_run" + std::to_string(run));
    std::filesystem::create_directories(run_dir);

    std::string training = "# " + provenance + " run=" + std::to_string(run) + "\nepisode,epsilon,agent,reward\n";
    for (const TrainingPoint& p : art.training) {
      for (std::size_t a = 0; a < p.rewards.size(); ++a) {
        training += std::to_string(p.episode) + "," + format_double(p.epsilon) + "," + agent_label(a) + "," +
                    format_double(p.rewards[a]) + "\n";
      }
    }
    write_text(run_dir / "training.csv", training);
    written.push_back(run_dir / "training.csv");

    auto save_all = [&](std::size_t episode, const std::vector<Mlp>& nets) {
      for (std::size_t i = 0; i < nets.size(); ++i) {
        const auto path = run_dir / ("agent" + std::to_string(i) + "_" + std::to_string(episode) + ".qnet");
        save_net(nets[i], path);
        written.push_back(path);
      }
    };
    for (const Snapshot& s : art.snapshots) save_all(s.episode, s.nets);
    save_all(config.training.episodes, art.nets);
  }
  return written;
}

}  // namespace relmarl
