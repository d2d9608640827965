#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "relmarl/experiment.hpp"

using namespace relmarl;

namespace {

constexpr const char* kText = R"(# two-agent resource collection
[scenario]
name = rc

[network]
agents = 2
edge = 0 0 1
edge = 1 1 1
edge = 0 1 0.5

[training]
episodes = 120
lr = 0.0005
gamma = 0.95
hidden = 32,16
freeze_agent = 1
freeze_at = 60

[harness]
experiment = demo
runs = 2
base_seed = 7
output = results
)";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(ExperimentConfig, ParsesAllSections) {
  const auto cfg = parse_experiment_config(kText);
  EXPECT_EQ(cfg.scenario, "rc");
  ASSERT_TRUE(cfg.network);
  EXPECT_EQ(*cfg.network, parse_network("agents=2; 0->0:1, 1->1:1, 0->1:0.5"));
  EXPECT_EQ(cfg.training.episodes, 120u);
  EXPECT_EQ(cfg.training.learning_rate, 0.0005);
  EXPECT_EQ(cfg.training.gamma, 0.95);
  EXPECT_EQ(cfg.training.hidden, (std::vector<std::size_t>{32, 16}));
  EXPECT_EQ(cfg.training.freeze, (FreezeDirective{1, 60}));
  EXPECT_EQ(cfg.training.batch, 32u);
  EXPECT_EQ(cfg.experiment, "demo");
  EXPECT_EQ(cfg.runs, 2u);
  EXPECT_EQ(cfg.base_seed, 7u);
  EXPECT_EQ(cfg.output, "results");
  EXPECT_NO_THROW(cfg.validate());
}

TEST(ExperimentConfig, RoundTripIsFieldForField) {
  const auto cfg = parse_experiment_config(kText);
  const auto text = serialize_experiment_config(cfg);
  EXPECT_EQ(parse_experiment_config(text), cfg);
  EXPECT_EQ(serialize_experiment_config(parse_experiment_config(text)), text);
  for (const auto& id : experiment_ids()) {
    for (const auto scale : {Scale::desk, Scale::full}) {
      const auto c = reproduce_config(id, "default", scale);
      EXPECT_EQ(parse_experiment_config(serialize_experiment_config(c)), c) << id;
    }
  }
}

TEST(ExperimentConfig, ValidationErrors) {
  auto cfg = parse_experiment_config(kText);
  cfg.scenario.clear();
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.scenario = "switch3";
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.scenario = "bogus";
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = parse_experiment_config(kText);
  cfg.network.reset();
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = parse_experiment_config(kText);
  cfg.runs = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ExperimentConfig, ParseErrors) {
  EXPECT_THROW(parse_experiment_config("name = rc\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("[weird]\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("[training]\nepisodes = many\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("[training]\nepisodes = 1\nepisodes = 2\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("[training]\nfreeze_at = 3\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("[network]\nedge = 0 0 1\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("[network]\nagents = 2\nedge = 0 1 2\n"), GraphError);
  EXPECT_THROW(parse_experiment_config("[training]\nbogus = 1\n"), ConfigError);
}

TEST(ExperimentConfig, Overrides) {
  auto cfg = parse_experiment_config(kText);
  apply_override(cfg, "episodes", "10");
  apply_override(cfg, "training.gamma", "0.5");
  apply_override(cfg, "runs", "4");
  apply_override(cfg, "seed", "99");
  apply_override(cfg, "scenario", "switch2");
  apply_override(cfg, "network", "agents=2; 0->0:1, 1->1:1, 1->0:0.5");
  apply_override(cfg, "freeze", "none");
  EXPECT_EQ(cfg.training.episodes, 10u);
  EXPECT_EQ(cfg.training.gamma, 0.5);
  EXPECT_EQ(cfg.runs, 4u);
  EXPECT_EQ(cfg.base_seed, 99u);
  EXPECT_EQ(cfg.scenario, "switch2");
  EXPECT_EQ(cfg.network->edges().size(), 3u);
  EXPECT_FALSE(cfg.training.freeze);
  EXPECT_THROW(apply_override(cfg, "nonsense", "1"), ConfigError);
  EXPECT_THROW(apply_override(cfg, "episodes", "-3"), ConfigError);
}

TEST(Reproduce, RegistryBudgets) {
  EXPECT_EQ(experiment_ids().size(), 8u);
  EXPECT_EQ(reproduce_config("rc-rm", "default", Scale::full).training.episodes, 25000u);
  EXPECT_EQ(reproduce_config("drc-rm", "default", Scale::full).training.episodes, 40000u);
  EXPECT_EQ(reproduce_config("rc-bc", "default", Scale::full).training.episodes, 15000u);
  EXPECT_EQ(reproduce_config("rc", "fig3b", Scale::desk).training.episodes, 5000u);
  EXPECT_EQ(reproduce_config("rc", "fig3b", Scale::desk).runs, 3u);
  EXPECT_EQ(reproduce_config("rc", "fig3b", Scale::full).runs, 10u);
  const auto frozen = reproduce_config("switch4-frozen", "default", Scale::full);
  ASSERT_TRUE(frozen.training.freeze);
  EXPECT_EQ(frozen.training.freeze->at_episode, 1000u);
  EXPECT_EQ(frozen.training.freeze->agent, 3u);
  EXPECT_EQ(frozen.training.episodes, 10000u);
  const auto desk = reproduce_config("switch4-frozen", "default", Scale::desk);
  EXPECT_EQ(desk.training.freeze->at_episode, 500u);
  EXPECT_EQ(desk.training.episodes, 3500u);
  EXPECT_EQ(desk.runs, 2u);
}

TEST(Reproduce, DefaultGraphs) {
  const auto rc = reproduce_config("rc", "fig3b", Scale::desk);
  EXPECT_EQ(*rc.network, parse_network("agents=2; 0->0:1, 1->1:1, 0->1:0.5"));
  EXPECT_TRUE(reproduce_config("rc", "fig3a", Scale::desk).network->is_self_interest());
  const auto s4 = reproduce_config("switch4", "fig3i", Scale::desk);
  EXPECT_EQ(*s4.network, parse_network("agents=4; 0->0:1, 1->1:1, 2->2:1, 3->3:1, 0->3:0.5, 1->3:0.5, 2->3:0.5"));
  for (const auto& id : experiment_ids()) {
    for (const auto& v : experiment_variants(id)) EXPECT_NO_THROW(reproduce_config(id, v, Scale::desk).validate());
  }
}

TEST(Reproduce, UnknownIdListsValidIds) {
  try {
    reproduce_config("rc-xx", "default", Scale::desk);
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const auto& id : experiment_ids()) EXPECT_NE(msg.find(id), std::string::npos) << id;
  }
  EXPECT_THROW(reproduce_config("rc", "fig3z", Scale::desk), ConfigError);
  EXPECT_THROW(parse_scale("huge"), ConfigError);
}

TEST(Reproduce, ShippedConfigsMatchRegistry) {
  const std::filesystem::path root = RELMARL_CONFIG_DIR;
  std::size_t checked = 0;
  for (const auto& [scale, dir] : {std::pair{Scale::desk, "desk"}, std::pair{Scale::full, "full"}}) {
    for (const auto& id : experiment_ids()) {
      for (const auto& v : experiment_variants(id)) {
        const auto path = root / dir / (id + "_" + v + ".cfg");
        ASSERT_TRUE(std::filesystem::exists(path)) << path;
        EXPECT_EQ(load_experiment_config(path), reproduce_config(id, v, scale)) << path;
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, 40u);
}

TEST(RunExperiment, ThreadCountDoesNotChangeResults) {
  auto cfg = reproduce_config("switch2", "fig3b", Scale::desk);
  cfg.training.episodes = 20;
  cfg.training.hidden = {8};
  cfg.training.eval_every = 5;
  cfg.runs = 3;
  const auto one = run_experiment(cfg, 1);
  const auto three = run_experiment(cfg, 3);
  EXPECT_EQ(one.records, three.records);
  EXPECT_EQ(one.table, three.table);
  ASSERT_EQ(one.records.size(), 12u);
  EXPECT_EQ(one.records[4].run, 1u);
}

TEST(RunExperiment, OutputsAreByteIdenticalAcrossRepeats) {
  auto cfg = reproduce_config("rc", "fig3b", Scale::desk);
  cfg.training.episodes = 20;
  cfg.training.hidden = {8};
  cfg.training.eval_every = 10;
  cfg.runs = 2;
  const auto base = std::filesystem::temp_directory_path() / "relmarl_repeat";
  std::filesystem::remove_all(base);
  const auto a = write_experiment_outputs(cfg, run_experiment(cfg, 1), base / "a");
  const auto b = write_experiment_outputs(cfg, run_experiment(cfg, 2), base / "b");
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].filename(), b[i].filename());
    EXPECT_EQ(slurp(a[i]), slurp(b[i])) << a[i];
  }
  const std::string series = slurp(base / "a" / "rc_fig3b_series.csv");
  EXPECT_NE(series.find("base_seed=42"), std::string::npos);
  std::filesystem::remove_all(base);
}
