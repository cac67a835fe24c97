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

// Action selection over the price x quantity grid from posterior-predictive
// profit moments.
//
// Grid actions are indexed lexicographically, price first:
//   index = price_index * quantity_grid.size() + quantity_index,
// and every argmax keeps the lowest index among ties.

#ifndef CRGAME_POLICY_H_
#define CRGAME_POLICY_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crgame/learning.h"
#include "crgame/market.h"
#include "crgame/rng.h"

namespace crgame::policy {

using market::Action;
using market::FirmType;

enum class PolicyKind {
  kProposedCredibleRisk,
  kBayesianRiskNeutral,
  kClassicalStaticPrior,
};

inline constexpr PolicyKind kAllPolicies[] = {
    PolicyKind::kProposedCredibleRisk,
    PolicyKind::kBayesianRiskNeutral,
    PolicyKind::kClassicalStaticPrior,
};

// Display names, e.g. "Proposed_Bayesian_CredibleRisk".
std::string_view PolicyName(PolicyKind kind);
// CLI spelling, e.g. "proposed-credible-risk".
std::string_view PolicySlug(PolicyKind kind);
// Accepts either spelling; throws InvalidArgument otherwise.
PolicyKind ParsePolicy(std::string_view text);

enum class ForecastRule {
  kRepeatLast,                // rival repeats its last action
  kTypeWeightedBestResponse,  // belief-weighted rival best response
};

struct BeliefState {
  double inventory = 0.0;
  FirmType own_type;
  learning::PosteriorHyper demand_posterior;
  learning::TypeBelief rival_type_belief{{0.5, 0.5}};
  std::optional<Action> last_rival_action;
  bool last_rival_stockout = false;
  // Carried for the rival's view of the game; derivable from public actions
  // and sales.
  double rival_inventory = 0.0;
  std::optional<Action> last_own_action;
  bool last_own_stockout = false;
  bool terminal_period = false;
};

struct PolicyConfig {
  double kappa = 0.6;
  int predictive_samples = 500;
  std::vector<double> price_grid = {8, 9, 10, 11, 12, 13, 14, 15, 16};
  std::vector<double> quantity_grid = {20, 25, 30, 35, 40, 45, 50, 55, 60, 65};
  market::SalvageMode salvage_mode = market::SalvageMode::kPerPeriod;
  ForecastRule forecast_rule = ForecastRule::kRepeatLast;
  learning::LearningOptions learning;
  // Frozen prior used by the static-prior heuristic.
  learning::PosteriorHyper static_prior = learning::ReferencePrior();
  // Candidate rival types, aligned with BeliefState::rival_type_belief.
  std::vector<FirmType> rival_types = {{6.0, 0.8, 1.5}, {10.0, 0.8, 1.5}};
  // Softmax temperature of the rival action-likelihood model (currency).
  double likelihood_temperature = 1.0;

  void Validate() const;
  int num_actions() const;
  Action ActionAt(int index) const;
  // Index of the grid action equal to `action`; throws if off-grid.
  int IndexOf(const Action& action) const;
  // Grid action closest to (quantity, price), ties toward the lower index.
  Action NearestAction(double quantity, double price) const;
};

struct ActionScore {
  Action action;
  double mean = 0.0;
  double sd = 0.0;
  double score = 0.0;
};

struct ProfitMoments {
  double mean = 0.0;
  double sd = 0.0;
};

// A fixed set of posterior-predictive draws (beta, epsilon) shared by every
// candidate action of one decision (common random numbers).
class PredictiveDrawSet {
 public:
  PredictiveDrawSet(const learning::PosteriorHyper& posterior,
                    const learning::LearningOptions& options, int samples,
                    RandomStream& rng);

  int size() const { return static_cast<int>(base_.size()); }

  // Fixes the rival's price and lagged stockout, precomputing per-draw
  // demand intercepts. Must be called before Moments()/ScoreGrid().
  void Condition(double rival_price, bool rival_stockout);

  ProfitMoments Moments(double inventory, const Action& candidate,
                        const FirmType& type, bool terminal,
                        market::SalvageMode salvage_mode) const;

  // Moments for every grid action, in grid-index order.
  std::vector<ActionScore> ScoreGrid(double inventory, const FirmType& type,
                                     bool terminal, double kappa,
                                     const PolicyConfig& config) const;

 private:
  std::vector<double> intercept_;  // b0 + eps per draw
  std::vector<double> own_slope_;
  std::vector<double> rival_slope_;
  std::vector<double> spill_;
  std::vector<double> base_;       // conditioned intercept per draw
  mutable std::vector<double> scratch_;
  bool conditioned_ = false;
};

ProfitMoments PredictiveProfitMoments(const BeliefState& state,
                                      const Action& candidate,
                                      const Action& rival_forecast,
                                      const PolicyConfig& config,
                                      RandomStream& rng);

// E[min(D, stock)] for D ~ N(mu, sd^2).
double ExpectedSalesClosedForm(double mu, double sd, double stock);
// E[min(max(D, 0), stock)] for D ~ N(mu, sd^2), stock >= 0.
double ExpectedSalesClosedFormFloored(double mu, double sd, double stock);

double CredibleRiskScore(double mean, double sd, double kappa);

Action ForecastRivalAction(const BeliefState& state,
                           const PolicyConfig& config);

struct Selection {
  Action action;
  int action_index = 0;
  std::vector<ActionScore> diagnostics;
};

// The proposed policy maximizes mean - config.kappa * sd; the risk-neutral
// policy uses kappa = 0 on the same draws; the static-prior policy maximizes
// closed-form expected profit under config.static_prior with no inventory,
// a grid-midpoint rival and no stockout, independent of `state` apart from
// the firm's own type and salvage timing.
Selection SelectAction(const BeliefState& state, const PolicyConfig& config,
                       PolicyKind policy, RandomStream& rng);

// Index of the maximal score, lowest index on ties.
int ArgmaxScore(const std::vector<ActionScore>& scores);

// Softmax action likelihood of the rival's observed action under each
// hypothesized rival type, from the rival's point of view: its own inventory
// and lagged information, the shared demand posterior and a repeat-last
// forecast of this firm. Entries are rescaled so the largest is 1.
std::vector<double> RivalActionLikelihoods(const BeliefState& state,
                                           const Action& observed_rival_action,
                                           const PolicyConfig& config,
                                           PolicyKind rival_policy,
                                           RandomStream& rng);

}  // namespace crgame::policy

#endif  // CRGAME_POLICY_H_
