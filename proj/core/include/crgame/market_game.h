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

// The duopoly as a GameModel over a reduced belief state.
//
// A node is (inventory, posterior mean of the demand intercept, belief that
// the rival is high-cost). The remaining posterior hyperparameters are frozen
// at a representative value. One-step rewards are credible-risk scores of the
// posterior-predictive profit and transitions integrate the predictive
// demand with Gauss–Hermite quadrature, projecting the updated inventory,
// intercept mean and type belief back onto the grid.

#ifndef CRGAME_MARKET_GAME_H_
#define CRGAME_MARKET_GAME_H_

#include <array>
#include <cstdint>
#include <vector>

#include "crgame/equilibrium.h"
#include "crgame/learning.h"
#include "crgame/market.h"
#include "crgame/numerics.h"
#include "crgame/policy.h"

namespace crgame::equilibrium {

struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  int count = 2;

  // count points from lo to hi inclusive; both endpoints are exact.
  std::vector<double> Points() const;
};

struct BeliefGridConfig {
  GridAxis inventory{0.0, 40.0, 3};
  GridAxis intercept{30.0, 50.0, 3};
  GridAxis high_cost_prob{0.0, 1.0, 2};
  int max_nodes = 5000;
};

struct BeliefNode {
  double inventory = 0.0;
  double intercept = 0.0;
  double high_cost_prob = 0.0;
};

enum class Projection { kNearest, kLinear };

class BeliefGrid {
 public:
  BeliefGrid() = default;
  BeliefGrid(std::vector<double> inventory, std::vector<double> intercept,
             std::vector<double> high_cost_prob);

  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<BeliefNode>& nodes() const { return nodes_; }
  const BeliefNode& node(int index) const { return nodes_.at(index); }
  const std::vector<double>& inventory_axis() const { return axes_[0]; }
  const std::vector<double>& intercept_axis() const { return axes_[1]; }
  const std::vector<double>& high_cost_axis() const { return axes_[2]; }
  std::array<int, 3> resolution() const;

  int Index(int inventory, int intercept, int high_cost) const;

  // Distributes unit mass for a continuous point over grid nodes, appending
  // (node, weight * mass) pairs to `out`. Points outside an axis are clamped
  // to its endpoints; nearest projection sends ties to the lower node.
  void Project(const BeliefNode& point, double mass, Projection projection,
               std::vector<Transition>& out) const;

 private:
  std::array<std::vector<double>, 3> axes_;
  std::vector<BeliefNode> nodes_;
};

// Throws InvalidArgument if an axis has fewer than 2 points or is not
// strictly increasing, or if the node count exceeds config.max_nodes.
BeliefGrid BuildBeliefGrid(const BeliefGridConfig& config);

struct MarketGameConfig {
  BeliefGridConfig grid;
  std::vector<double> price_grid = {8, 9, 10, 11, 12, 13, 14, 15, 16};
  std::vector<double> quantity_grid = {20, 25, 30, 35, 40, 45, 50, 55, 60, 65};
  double discount = 0.98;
  std::array<double, 2> kappa = {0.6, 0.6};
  std::array<market::FirmType, 2> firm_types = {
      market::FirmType{6.0, 0.8, 1.5}, market::FirmType{10.0, 0.8, 1.5}};
  // Low- and high-cost rival hypotheses used for the type-belief axis.
  std::array<double, 2> cost_levels = {6.0, 10.0};
  // Representative posterior; its intercept mean is replaced per node.
  learning::PosteriorHyper representative = learning::ReferencePrior();
  learning::LearningOptions learning;
  int quadrature_order = 9;
  Projection projection = Projection::kNearest;
  double likelihood_temperature = 1.0;
  market::SalvageMode salvage_mode = market::SalvageMode::kPerPeriod;

  // Between-sweep refresh of the representative hyperparameters by
  // simulating trajectories under the current policies; 0 disables it.
  int refresh_trajectories = 0;
  int refresh_horizon = 30;
  std::uint64_t refresh_seed = 0;
  market::DemandParams truth;

  void Validate() const;
};

class MarketGameModel : public GameModel {
 public:
  explicit MarketGameModel(MarketGameConfig config);

  int num_nodes() const override { return grid_.size(); }
  int num_actions(int /*firm*/) const override { return num_actions_; }
  double discount() const override { return config_.discount; }
  double Reward(int firm, int node, int action,
                int rival_action) const override;
  void Transitions(int firm, int node, int action, int rival_action,
                   std::vector<Transition>& out) const override;
  bool Refresh(const std::array<GridPolicy, 2>& policies) override;

  const BeliefGrid& grid() const { return grid_; }
  const MarketGameConfig& config() const { return config_; }
  market::Action ActionAt(int index) const;
  const learning::PosteriorHyper& representative() const {
    return config_.representative;
  }

  // Predictive profit moments at a node for own cost `cost`.
  policy::ProfitMoments Moments(int node, int action, int rival_action,
                                const market::FirmType& type) const;
  // Greedy one-step (myopic) policy of `firm` against `rival_policy`.
  GridPolicy MyopicPolicy(int firm, const GridPolicy& rival_policy) const;
  // Nearest node for a continuous belief point.
  int NearestNode(const BeliefNode& point) const;
  // log L(high) - log L(low) of the rival's action under the softmax of its
  // credible-risk scores against `action` at `node`.
  double LogLikelihoodRatio(int firm, int node, int action,
                            int rival_action) const;
  static double UpdatedHighCost(double prior, double log_ratio);

 private:
  struct Predictive {
    market::Covariate x;
    double mean;
    double sd;
  };
  Predictive PredictiveAt(int node, int action, int rival_action) const;

  MarketGameConfig config_;
  learning::PosteriorHyper initial_representative_;
  BeliefGrid grid_;
  int num_actions_;
  QuadratureRule quadrature_;
  policy::PolicyConfig action_grid_;
};

}  // namespace crgame::equilibrium

#endif  // CRGAME_MARKET_GAME_H_
