// Copyright 2026 The crgame Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "crgame/equilibrium.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "crgame/market_game.h"

namespace crgame::equilibrium {
namespace {

// Two nodes, two actions. Firm 0: at node 0, action 0 pays 1 and stays,
// action 1 pays 0.5 and moves to node 1; at node 1, action 0 pays 2 and
// stays, action 1 pays 0 and moves to node 0. Rewards ignore the rival.
TabularGame HandToy(double discount) {
  TabularGame g(2, {2, 2}, discount);
  for (int firm = 0; firm < 2; ++firm) {
    for (int rival = 0; rival < 2; ++rival) {
      g.SetReward(firm, 0, 0, rival, 1.0);
      g.SetTransitions(firm, 0, 0, rival, {{0, 1.0}});
      g.SetReward(firm, 0, 1, rival, 0.5);
      g.SetTransitions(firm, 0, 1, rival, {{1, 1.0}});
      g.SetReward(firm, 1, 0, rival, 2.0);
      g.SetTransitions(firm, 1, 0, rival, {{1, 1.0}});
      g.SetReward(firm, 1, 1, rival, 0.0);
      g.SetTransitions(firm, 1, 1, rival, {{0, 1.0}});
    }
  }
  return g;
}

const GridPolicy kZeros{{0, 0}};

TEST(EquilibriumTest, HandToyBellmanSteps) {
  const TabularGame g = HandToy(0.5);
  BellmanResult r = BellmanApply(ValueFunction{{0.0, 0.0}}, kZeros, g, 0);
  EXPECT_EQ(r.value.values, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(r.policy.actions, (std::vector<int>{0, 0}));
  r = BellmanApply(r.value, kZeros, g, 0);
  // node 0: max(1 + 0.5, 0.5 + 1); node 1: max(2 + 1, 0 + 0.5).
  EXPECT_EQ(r.value.values, (std::vector<double>{1.5, 3.0}));
  EXPECT_EQ(r.policy.actions, (std::vector<int>{0, 0}));
}

TEST(EquilibriumTest, HandToyFixedPoint) {
  const TabularGame g = HandToy(0.5);
  const ValueIterationResult r =
      ValueIterate(g, 0, kZeros, ValueIterationOptions{1e-12, 1000});
  // V1 = 2 / (1 - 0.5) = 4; V0 = max(1 + V0 / 2, 0.5 + 2) = 2.5.
  EXPECT_NEAR(r.value.values[0], 2.5, 1e-10);
  EXPECT_NEAR(r.value.values[1], 4.0, 1e-10);
  EXPECT_EQ(r.policy.actions, (std::vector<int>{1, 0}));
  EXPECT_TRUE(r.diagnostics.converged);
}

TEST(EquilibriumTest, HandToyEquilibriumConvergesQuickly) {
  TabularGame g = HandToy(0.5);
  EquilibriumOptions options;
  options.value_iteration.tolerance = 1e-12;
  const EquilibriumResult r = EquilibriumIteration(g, options);
  EXPECT_TRUE(r.diagnostics.converged);
  EXPECT_LE(r.sweeps, 3);
  EXPECT_EQ(r.policies[0].actions, (std::vector<int>{1, 0}));
  EXPECT_EQ(r.policies[1].actions, (std::vector<int>{1, 0}));
}

TabularGame RandomGame(int nodes, int actions, double discount,
                       std::uint64_t seed, double shift = 0.0) {
  RandomStream rng(StreamKey{.master_seed = seed});
  TabularGame g(nodes, {actions, actions}, discount);
  for (int f = 0; f < 2; ++f) {
    for (int s = 0; s < nodes; ++s) {
      for (int a = 0; a < actions; ++a) {
        for (int b = 0; b < actions; ++b) {
          g.SetReward(f, s, a, b, 10.0 * rng.Uniform() - 5.0 + shift);
          std::vector<Transition> t;
          double total = 0.0;
          for (int k = 0; k < 3; ++k) {
            t.push_back({static_cast<int>(rng.Uniform() * nodes),
                         rng.Uniform() + 0.1});
            total += t.back().prob;
          }
          for (auto& x : t) x.prob /= total;
          g.SetTransitions(f, s, a, b, t);
        }
      }
    }
  }
  return g;
}

TEST(EquilibriumTest, ConstantShiftAndMonotonicity) {
  const double delta = 0.9;
  const TabularGame g = RandomGame(6, 3, delta, 1);
  const TabularGame shifted = RandomGame(6, 3, delta, 1, 2.0);
  const GridPolicy rival{std::vector<int>(6, 1)};
  ValueFunction v{{1, -2, 3, 0.5, 4, -1}};
  const BellmanResult base = BellmanApply(v, rival, g, 0);
  for (double& x : v.values) x += 7.0;
  const BellmanResult up = BellmanApply(v, rival, g, 0);
  EXPECT_EQ(base.policy, up.policy);
  for (int s = 0; s < 6; ++s) {
    EXPECT_NEAR(up.value.values[s], base.value.values[s] + delta * 7.0, 1e-12);
  }

  const ValueIterationOptions opts{1e-11, 100000};
  const ValueIterationResult a = ValueIterate(g, 0, rival, opts);
  const ValueIterationResult b = ValueIterate(shifted, 0, rival, opts);
  EXPECT_EQ(a.policy, b.policy);
  for (int s = 0; s < 6; ++s) {
    EXPECT_NEAR(b.value.values[s], a.value.values[s] + 2.0 / (1 - delta), 1e-8);
  }
}

TEST(EquilibriumTest, ZeroRewardFixedPointIsZero) {
  TabularGame g = RandomGame(5, 2, 0.95, 2);
  for (int f = 0; f < 2; ++f)
    for (int s = 0; s < 5; ++s)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) g.SetReward(f, s, a, b, 0.0);
  const ValueIterationResult r =
      ValueIterate(g, 1, GridPolicy{std::vector<int>(5, 0)}, {});
  for (double v : r.value.values) EXPECT_EQ(v, 0.0);
}

TEST(EquilibriumTest, DiscountMustBeBelowOne) {
  const TabularGame g = HandToy(1.0);
  EXPECT_THROW(ValueIterate(g, 0, kZeros, {}), InvalidArgument);
  const TabularGame neg = HandToy(-0.1);
  EXPECT_THROW(ValueIterate(neg, 0, kZeros, {}), InvalidArgument);
}

TEST(EquilibriumTest, IterationCapRaisesConvergenceError) {
  const TabularGame g = RandomGame(5, 2, 0.99, 3);
  try {
    ValueIterate(g, 0, GridPolicy{std::vector<int>(5, 0)},
                 ValueIterationOptions{1e-12, 5});
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.diagnostics().sup_norm_deltas.size(), 5u);
    EXPECT_FALSE(e.diagnostics().converged);
  }
}

TEST(EquilibriumTest, DeterministicOneShotMatchesBruteForceNash) {
  int checked = 0;
  for (std::uint64_t seed = 10; seed < 60; ++seed) {
    TabularGame g = RandomGame(1, 4, 0.0, seed);
    // Enumerate pure equilibria.
    std::vector<std::pair<int, int>> nash;
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        bool ok = true;
        for (int x = 0; x < 4; ++x) {
          ok = ok && g.Reward(0, 0, x, b) <= g.Reward(0, 0, a, b);
          ok = ok && g.Reward(1, 0, x, a) <= g.Reward(1, 0, b, a);
        }
        if (ok) nash.emplace_back(a, b);
      }
    }
    const EquilibriumResult r = EquilibriumIteration(g, {});
    if (!r.diagnostics.converged) {
      continue;  // pure-strategy cycling is reported, not resolved
    }
    ++checked;
    const std::pair<int, int> got{r.policies[0].actions[0],
                                  r.policies[1].actions[0]};
    EXPECT_NE(std::find(nash.begin(), nash.end(), got), nash.end()) << seed;
  }
  EXPECT_GT(checked, 20);
}

TEST(EquilibriumTest, SweepDeltasContract) {
  const TabularGame g = RandomGame(8, 3, 0.9, 4);
  const ValueIterationResult r = ValueIterate(
      g, 0, GridPolicy{std::vector<int>(8, 2)}, ValueIterationOptions{1e-10, 10000});
  const auto& d = r.diagnostics.sup_norm_deltas;
  for (std::size_t k = 1; k < d.size(); ++k) {
    ASSERT_LE(d[k], 0.9 * d[k - 1] + 1e-9) << k;
  }
}

// The 18-node duopoly instance used by the equilibrium smoke config.
MarketGameConfig ToyConfig(double discount) {
  MarketGameConfig c;
  c.discount = discount;
  c.salvage_mode = market::SalvageMode::kTerminal;
  return c;
}

TEST(BeliefGridTest, ShapeAndEndpoints) {
  const BeliefGrid grid = BuildBeliefGrid(BeliefGridConfig{});
  EXPECT_EQ(grid.size(), 18);
  EXPECT_EQ(grid.resolution(), (std::array<int, 3>{3, 3, 2}));
  EXPECT_EQ(grid.inventory_axis().front(), 0.0);
  EXPECT_EQ(grid.inventory_axis().back(), 40.0);
  EXPECT_EQ(grid.intercept_axis().front(), 30.0);
  EXPECT_EQ(grid.intercept_axis().back(), 50.0);
  for (const BeliefNode& n : grid.nodes()) {
    EXPECT_GE(n.high_cost_prob, 0.0);
    EXPECT_LE(n.high_cost_prob, 1.0);
  }
  EXPECT_EQ(grid.node(grid.Index(2, 1, 0)).inventory, 40.0);
  EXPECT_EQ(grid.node(grid.Index(2, 1, 0)).intercept, 40.0);

  BeliefGridConfig big;
  big.inventory.count = 100;
  big.intercept.count = 100;
  big.max_nodes = 5000;
  EXPECT_THROW(BuildBeliefGrid(big), InvalidArgument);
  BeliefGridConfig thin;
  thin.inventory.count = 1;
  EXPECT_THROW(BuildBeliefGrid(thin), InvalidArgument);
}

TEST(BeliefGridTest, Projection) {
  const BeliefGrid grid = BuildBeliefGrid(BeliefGridConfig{});
  std::vector<Transition> out;
  // Halfway between inventory nodes 0 and 20 goes to the lower one.
  grid.Project({10.0, 40.0, 0.0}, 1.0, Projection::kNearest, out);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].node, grid.Index(0, 1, 0));
  out.clear();
  grid.Project({-5.0, 90.0, 2.0}, 1.0, Projection::kNearest, out);
  EXPECT_EQ(out[0].node, grid.Index(0, 2, 1));

  out.clear();
  grid.Project({5.0, 37.5, 0.25}, 0.5, Projection::kLinear, out);
  double total = 0.0, inventory = 0.0;
  for (const Transition& t : out) {
    total += t.prob;
    inventory += t.prob * grid.node(t.node).inventory;
  }
  EXPECT_NEAR(total, 0.5, 1e-15);
  EXPECT_NEAR(inventory, 0.5 * 5.0, 1e-12);
}

TEST(MarketGameTest, TransitionsAreDistributions) {
  for (Projection projection : {Projection::kNearest, Projection::kLinear}) {
    MarketGameConfig c = ToyConfig(0.9);
    c.projection = projection;
    const MarketGameModel model(c);
    std::vector<Transition> out;
    for (int node = 0; node < model.num_nodes(); ++node) {
      for (int a = 0; a < model.num_actions(0); a += 7) {
        model.Transitions(node % 2, node, a, (a * 3) % 90, out);
        double total = 0.0;
        for (const Transition& t : out) {
          ASSERT_GE(t.prob, 0.0);
          ASSERT_LT(t.node, model.num_nodes());
          total += t.prob;
        }
        ASSERT_NEAR(total, 1.0, 1e-12);
      }
    }
  }
}

TEST(MarketGameTest, ContractionOnToyInstance) {
  const MarketGameModel model(ToyConfig(0.98));
  const GridPolicy rival = model.MyopicPolicy(1, GridPolicy{std::vector<int>(18, 44)});
  const BestResponseProblem problem(model, 0, rival);
  RandomStream rng(StreamKey{.master_seed = 21,
                             .purpose = StreamPurpose::kContractionCheck});
  const ContractionReport report = ContractionCheck(problem, 100, rng);
  EXPECT_TRUE(report.passed);
  EXPECT_TRUE(report.violations.empty());
  EXPECT_LE(report.max_ratio, 0.98 + 1e-12);
  EXPECT_LE(report.constant_shift_error, 1e-9);

  // V = W gives a zero left-hand side.
  ValueFunction v{std::vector<double>(18, 3.0)}, tv, tw;
  problem.Apply(v, &tv, nullptr);
  problem.Apply(v, &tw, nullptr);
  EXPECT_EQ(tv.values, tw.values);
}

TEST(MarketGameTest, FixedPointIsUniqueUpToTolerance) {
  const MarketGameModel model(ToyConfig(0.98));
  const GridPolicy rival{std::vector<int>(18, 44)};
  const BestResponseProblem problem(model, 0, rival);
  RandomStream rng(StreamKey{.master_seed = 22});
  const double radius = problem.max_abs_reward() / (1 - 0.98);
  ValueFunction v0, v1;
  for (int s = 0; s < 18; ++s) {
    v0.values.push_back(radius * (2 * rng.Uniform() - 1));
    v1.values.push_back(radius * (2 * rng.Uniform() - 1));
  }
  const ValueIterationOptions opts{1e-6, 100000};
  const ValueIterationResult a = ValueIterate(problem, opts, v0);
  const ValueIterationResult b = ValueIterate(problem, opts, v1);
  for (int s = 0; s < 18; ++s) {
    EXPECT_LT(std::abs(a.value.values[s] - b.value.values[s]),
              2 * 1e-6 / (1 - 0.98));
  }
}

TEST(MarketGameTest, ZeroDiscountEqualsMyopic) {
  MarketGameModel model(ToyConfig(0.0));
  const EquilibriumResult r = EquilibriumIteration(model, {});
  ASSERT_TRUE(r.diagnostics.converged);
  EXPECT_EQ(r.policies[0], model.MyopicPolicy(0, r.policies[1]));
  EXPECT_EQ(r.policies[1], model.MyopicPolicy(1, r.policies[0]));
}

// With a point-mass posterior, no noise and kappa = 0 each node is a
// deterministic one-shot game; check mutual best responses against direct
// profit evaluation over the full 9 x 10 grid.
TEST(MarketGameTest, PointMassOneShotEquilibriumIsNash) {
  MarketGameConfig c = ToyConfig(0.0);
  c.kappa = {0.0, 0.0};
  c.representative.S = 1e-20 * learning::Matrix4::Identity();
  c.learning.variance_mode = learning::VarianceMode::kKnown;
  c.learning.known_sigma = 1e-9;
  MarketGameModel model(c);
  const EquilibriumResult r = EquilibriumIteration(model, {});
  ASSERT_TRUE(r.diagnostics.converged);

  const learning::Covariate& m = c.representative.m;
  auto profit = [&](int firm, int node, int own, int rival) {
    const BeliefNode& n = model.grid().node(node);
    const market::Action a = model.ActionAt(own);
    const market::Action b = model.ActionAt(rival);
    const double demand = n.intercept + m(1) * a.price + m(2) * b.price;
    const double stock = n.inventory + a.quantity;
    const double sales = std::min(std::max(demand, 0.0), stock);
    const market::FirmType& t = c.firm_types[firm];
    // Terminal salvage mode, non-terminal period: no salvage credit.
    return a.price * sales - t.cost * a.quantity - t.holding * (stock - sales);
  };
  for (int node = 0; node < model.num_nodes(); ++node) {
    for (int firm = 0; firm < 2; ++firm) {
      const int own = r.policies[firm].actions[node];
      const int rival = r.policies[1 - firm].actions[node];
      const double chosen = profit(firm, node, own, rival);
      for (int x = 0; x < model.num_actions(firm); ++x) {
        ASSERT_LE(profit(firm, node, x, rival), chosen + 1e-6)
            << "node " << node << " firm " << firm << " deviation " << x;
      }
    }
  }
}

TEST(MarketGameTest, SymmetricModelGivesSymmetricPolicies) {
  MarketGameConfig c = ToyConfig(0.9);
  c.firm_types = {market::FirmType{8.0, 0.8, 1.5}, market::FirmType{8.0, 0.8, 1.5}};
  MarketGameModel model(c);
  EquilibriumOptions options;
  options.scheme = UpdateScheme::kSimultaneous;
  const EquilibriumResult r = EquilibriumIteration(model, options);
  EXPECT_EQ(r.policies[0], r.policies[1]);
  EXPECT_EQ(r.values[0].values, r.values[1].values);
}

TEST(MarketGameTest, ToyEquilibriumConverges) {
  MarketGameModel model(ToyConfig(0.9));
  const EquilibriumResult r = EquilibriumIteration(model, {});
  EXPECT_TRUE(r.diagnostics.converged);
  for (int firm = 0; firm < 2; ++firm) {
    for (int a : r.policies[firm].actions) {
      EXPECT_GE(a, 0);
      EXPECT_LT(a, model.num_actions(firm));
    }
  }
}

TEST(MarketGameTest, TypeBeliefUpdateOnLogits) {
  EXPECT_NEAR(MarketGameModel::UpdatedHighCost(0.5, 0.0), 0.5, 1e-15);
  EXPECT_NEAR(MarketGameModel::UpdatedHighCost(0.5, std::log(4.0)), 0.8, 1e-12);
  EXPECT_EQ(MarketGameModel::UpdatedHighCost(0.0, 3.0), 0.0);
  EXPECT_EQ(MarketGameModel::UpdatedHighCost(1.0, -3.0), 1.0);
}

}  // namespace
}  // namespace crgame::equilibrium
