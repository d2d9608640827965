#include <gtest/gtest.h>

#include <vector>

#include "oracles.hpp"
#include "relmarl/rng.hpp"
#include "relmarl/scenarios.hpp"
#include "relmarl/switch_world.hpp"

using namespace relmarl;

namespace {

constexpr std::size_t U = 0, D = 1, L = 2, R = 3, S = 4;

}  // namespace

TEST(SwitchWorld, ArrivalPaysGoalRewardOnThatStep) {
  SwitchScenario sc = switch_scenario(2);
  sc.starts = {{5, 0}, {0, 1}};
  const SwitchWorld w(sc);
  const auto r = w.step(w.initial_state(), std::vector<std::size_t>{R, S});
  EXPECT_TRUE(r.state.reached[0]);
  EXPECT_EQ(r.state.arrival_step[0], 1);
  EXPECT_DOUBLE_EQ(r.rewards[0], 5.0 - 0.1);
  EXPECT_DOUBLE_EQ(r.rewards[1], -0.1);
}

TEST(SwitchWorld, TwoAgentsContestingBridgeCellBothStay) {
  SwitchScenario sc = switch_scenario(2);
  sc.starts = {{1, 1}, {3, 1}};
  const SwitchWorld w(sc);
  const auto r = w.step(w.initial_state(), std::vector<std::size_t>{R, L});
  EXPECT_EQ(r.state.agents[0], (Cell{1, 1}));
  EXPECT_EQ(r.state.agents[1], (Cell{3, 1}));
  EXPECT_EQ(r.rewards, (std::vector<double>{-0.1, -0.1}));
}

TEST(SwitchWorld, SwapOnBridgeFails) {
  SwitchScenario sc = switch_scenario(2);
  sc.starts = {{2, 1}, {3, 1}};
  const SwitchWorld w(sc);
  const auto r = w.step(w.initial_state(), std::vector<std::size_t>{R, L});
  EXPECT_EQ(r.state.agents[0], (Cell{2, 1}));
  EXPECT_EQ(r.state.agents[1], (Cell{3, 1}));
}

TEST(SwitchWorld, WallsBlock) {
  const SwitchWorld w(switch_scenario(2));
  // red at (0,0): right to (1,0) is open, then (2,0) is a wall
  auto r = w.step(w.initial_state(), std::vector<std::size_t>{R, S});
  EXPECT_EQ(r.state.agents[0], (Cell{1, 0}));
  r = w.step(r.state, std::vector<std::size_t>{R, S});
  EXPECT_EQ(r.state.agents[0], (Cell{1, 0}));
  r = w.step(r.state, std::vector<std::size_t>{U, S});
  EXPECT_EQ(r.state.agents[0], (Cell{1, 0}));
}

TEST(SwitchWorld, SteppingAfterAllReachedIsAnError) {
  SwitchScenario sc = switch_scenario(2);
  sc.starts = {{5, 0}, {1, 0}};
  const SwitchWorld w(sc);
  const auto r = w.step(w.initial_state(), std::vector<std::size_t>{R, L});
  EXPECT_TRUE(r.terminal);
  EXPECT_THROW(w.step(r.state, std::vector<std::size_t>{S, S}), EnvError);
}

TEST(SwitchWorld, ArrivedAgentsAreInactive) {
  SwitchScenario sc = switch_scenario(2);
  sc.starts = {{5, 0}, {2, 1}};
  const SwitchWorld w(sc);
  auto r = w.step(w.initial_state(), std::vector<std::size_t>{R, S});
  ASSERT_TRUE(r.state.reached[0]);
  r = w.step(r.state, std::vector<std::size_t>{L, S});
  EXPECT_EQ(r.state.agents[0], (Cell{6, 0}));
  EXPECT_EQ(r.rewards[0], 0.0);
}

TEST(SwitchWorld, EncodingLength) {
  EXPECT_EQ(make_environment("switch2")->observation_size(), 7u);
  EXPECT_EQ(make_environment("switch4")->observation_size(), 13u);
}

TEST(SwitchWorld, EncodingCarriesStepFraction) {
  const SwitchWorld w(switch_scenario(2));
  SwitchState s = w.initial_state();
  EXPECT_EQ(w.encode(s), (std::vector<double>{0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0}));
  s = w.step(s, std::vector<std::size_t>{D, S}).state;
  const auto x = w.encode(s);
  EXPECT_EQ(x[0], 0.5);
  EXPECT_EQ(x[6], 1.0 / 50.0);
}

TEST(SwitchWorld, ShortestPathsMatchBfs) {
  const SwitchScenario sc = switch_scenario(4);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto d = oracle::bfs_steps(sc.board, sc.starts[i].col, sc.starts[i].row, sc.goals[i].col, sc.goals[i].row);
    ASSERT_TRUE(d.has_value());
    EXPECT_EQ(*d, 8);
  }
}

TEST(SwitchWorld, SoloCrossingTakesShortestPath) {
  // red alone on the board follows down, six rights, up
  SwitchScenario sc = switch_scenario(2);
  sc.starts = {{0, 0}, {6, 2}};
  sc.goals = {{6, 0}, {6, 2}};
  const SwitchWorld w(sc);
  SwitchState s = w.initial_state();
  double total = 0.0;
  for (std::size_t a : {D, R, R, R, R, R, R, U}) {
    const auto r = w.step(s, std::vector<std::size_t>{a, S});
    total += r.rewards[0];
    s = r.state;
  }
  EXPECT_TRUE(s.reached[0]);
  EXPECT_NEAR(total, 5.0 - 0.1 * 8, 1e-12);
}

TEST(SwitchWorldProperty, FuzzOccupancyRewardsAndLength) {
  for (std::size_t n : {2u, 3u, 4u}) {
    const SwitchWorld w(switch_scenario(n));
    Rng rng(7 + n);
    SwitchState s = w.initial_state();
    int len = 0;
    for (int k = 0; k < 100000; ++k) {
      if (w.is_terminal(s)) {
        s = w.initial_state();
        len = 0;
      }
      std::vector<std::size_t> a(n);
      for (auto& x : a) x = rng.uniform_index(5);
      const auto r = w.step(s, a);
      ASSERT_LE(++len, 50);
      for (std::size_t i = 0; i < n; ++i) {
        ASSERT_TRUE(w.is_open(r.state.agents[i]));
        const double x = r.rewards[i];
        ASSERT_TRUE(x == 0.0 || x == -0.1 || x == 5.0 - 0.1) << x;
        for (std::size_t j = 0; j < i; ++j) {
          if (!r.state.reached[i] && !r.state.reached[j]) {
            ASSERT_NE(r.state.agents[i], r.state.agents[j]);
          }
        }
      }
      s = r.state;
    }
  }
}
