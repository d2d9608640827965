#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "relmarl/evaluation.hpp"
#include "relmarl/scenarios.hpp"

using namespace relmarl;

namespace {

std::vector<Mlp> fresh_nets(const Environment& env, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t h[] = {16, 16};
  std::vector<Mlp> nets;
  for (std::size_t i = 0; i < env.agent_count(); ++i) nets.push_back(init_net(env.observation_size(), h, 5, rng));
  return nets;
}

std::vector<EvalRecord> synthetic_records(std::size_t runs, std::size_t evals, std::size_t agents) {
  std::vector<EvalRecord> out;
  for (std::size_t r = 0; r < runs; ++r) {
    for (std::size_t e = 1; e <= evals; ++e) {
      std::vector<double> rewards;
      for (std::size_t a = 0; a < agents; ++a) rewards.push_back(0.1 * static_cast<double>(r + 3 * e) - 1.7 * a);
      out.push_back(make_record(r, 50 * e, rewards, {}));
    }
  }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Evaluation, GreedyEvalIsDeterministic) {
  auto env = make_environment("rc");
  const auto nets = fresh_nets(*env, 1);
  EXPECT_EQ(greedy_eval(*env, nets), greedy_eval(*env, nets));
}

TEST(Evaluation, FreshNetsOnRcRespectRewardBounds) {
  auto env = make_environment("rc");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (double r : greedy_eval(*env, fresh_nets(*env, seed))) {
      EXPECT_LE(r, 10.0);
      EXPECT_GE(r, -50.0);
    }
  }
}

TEST(Evaluation, TraceRecordsEverySteps) {
  auto env = make_environment("switch2");
  const auto nets = fresh_nets(*env, 3);
  const auto ep = greedy_episode(*env, nets, true);
  EXPECT_EQ(static_cast<int>(ep.trace.size()), ep.steps);
  std::ostringstream os;
  write_trace(os, ep);
  const std::string text = os.str();
  EXPECT_EQ(static_cast<int>(std::count(text.begin(), text.end(), '\n')), ep.steps);
  EXPECT_NE(text.find("\"cells\""), std::string::npos);
}

TEST(Evaluation, ConstantSamplesHaveZeroHalfWidth) {
  const std::vector<double> sevens(10, 7.0);
  const auto row = summarize("blue", sevens);
  EXPECT_EQ(row.mean, 7.0);
  ASSERT_TRUE(row.half_width);
  EXPECT_EQ(*row.half_width, 0.0);
  EXPECT_FALSE(std::signbit(*row.half_width));
  const std::vector<double> awkward(10, -4.2);
  EXPECT_EQ(summarize("red", awkward).mean, -4.2);
  EXPECT_EQ(*summarize("red", awkward).half_width, 0.0);
}

TEST(Evaluation, HalfWidthMatchesTTable) {
  const std::vector<double> s{1.0, 2.0, 3.0};
  const auto row = summarize("red", s);
  EXPECT_DOUBLE_EQ(row.mean, 2.0);
  EXPECT_NEAR(*row.half_width, oracle::t_table_95(2) * 1.0 / std::sqrt(3.0), 1e-3);
  EXPECT_NEAR(*row.half_width, 2.484, 1e-3);
  for (std::size_t dof = 1; dof <= 9; ++dof) EXPECT_NEAR(t_critical_95(dof), oracle::t_table_95(dof), 1e-3);
}

TEST(Evaluation, SingleSampleHasNoInterval) {
  const std::vector<double> one{3.5};
  const auto row = summarize("red", one);
  EXPECT_FALSE(row.half_width);
  const std::vector<AggregateRow> rows{row};
  EXPECT_NE(table_csv(rows).find("red,3.5,n/a,1"), std::string::npos);
}

TEST(Evaluation, HalfWidthShrinksAsRootN) {
  // alternating +/-1 around 0 keeps the sample variance at n/(n-1)
  auto hw = [](std::size_t n) {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = i % 2 ? 1.0 : -1.0;
    const double sd = std::sqrt(static_cast<double>(n) / static_cast<double>(n - 1));
    return *summarize("x", s).half_width / (t_critical_95(n - 1) * sd);
  };
  EXPECT_NEAR(hw(4) / hw(16), 2.0, 1e-12);
  EXPECT_NEAR(hw(10) / hw(40), 2.0, 1e-12);
}

TEST(Evaluation, AggregateUsesLastRecordAndIgnoresRunOrder) {
  auto records = synthetic_records(4, 3, 2);
  const auto rows = aggregate(records);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].agent, "red");
  EXPECT_EQ(rows[0].samples, 4u);
  EXPECT_NEAR(rows[0].mean, 0.1 * (1.5 + 9.0), 1e-12);
  std::reverse(records.begin(), records.end());
  const auto again = aggregate(records);
  EXPECT_NEAR(again[0].mean, rows[0].mean, 1e-12);
  EXPECT_NEAR(*again[1].half_width, *rows[1].half_width, 1e-12);
}

TEST(Evaluation, CollectiveEqualsSelfInterestTeamReward) {
  const auto g = RelationalNetwork::self_interest(3);
  for (const auto& r : synthetic_records(3, 4, 3)) {
    EXPECT_EQ(r.collective, g.team_reward(r.rewards));
  }
}

TEST(Evaluation, SeriesRowCountAndRoundTrip) {
  const auto g = parse_network("agents=2; 0->0:1, 1->1:1, 0->1:0.5");
  const TeamRewardFn team = [&](std::span<const double> r) { return g.team_reward(r); };
  std::vector<EvalRecord> records;
  for (const auto& r : synthetic_records(2, 3, 2)) records.push_back(make_record(r.run, r.episode, r.rewards, team));
  const std::string csv = series_csv(records, "seed=42");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 1 + 12);
  EXPECT_EQ(parse_series_csv(csv, team), records);
}

TEST(Evaluation, ParseRejectsGarbage) {
  EXPECT_THROW(parse_series_csv("nope\n"), std::invalid_argument);
  EXPECT_THROW(parse_series_csv("run,episode,agent,reward,collective\n0,1,red\n"), std::invalid_argument);
  EXPECT_THROW(parse_series_csv("run,episode,agent,reward,collective\n0,1,purple,1,1\n"), std::invalid_argument);
}

TEST(Evaluation, EmitReportWritesTwoFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "relmarl_eval_report";
  std::filesystem::remove_all(dir);
  const auto files = emit_report(synthetic_records(2, 3, 2), dir, "demo", "base_seed=42");
  const std::string table = slurp(files.table);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 1 + 1 + 2);
  EXPECT_TRUE(table.starts_with("# base_seed=42\n"));
  EXPECT_TRUE(std::filesystem::exists(files.series));
  std::filesystem::remove_all(dir);
}
