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

// Monte Carlo experiment runner: replications of the duopoly under each
// policy, per-period curves, summary statistics, bootstrap comparisons and
// dominance curves.
//
// Every random quantity comes from a stream keyed by (master_seed, policy,
// replication, firm, period, purpose). Cost draws and demand noise use
// policy slot 0, so replication r faces the same costs and noise under every
// policy.

#ifndef CRGAME_SIMHARNESS_H_
#define CRGAME_SIMHARNESS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "crgame/learning.h"
#include "crgame/market.h"
#include "crgame/policy.h"
#include "crgame/rng.h"

namespace crgame::sim {

using policy::PolicyKind;

enum class PolicyAssignment {
  kBothSame,      // both firms run the policy under test
  kMixedPairing,  // firm 0 runs it, firm 1 runs SimConfig::mixed_opponent
};

struct SimConfig {
  int horizon = 30;
  int replications = 150;
  double delta = 0.98;
  market::DemandParams truth;
  std::array<double, 2> cost_levels = {6.0, 10.0};
  std::array<double, 2> high_cost_prob = {0.5, 0.5};
  double holding = 0.8;
  double salvage = 1.5;
  double initial_inventory = 0.0;
  learning::PosteriorHyper prior = learning::ReferencePrior();
  // kappa, grids, salvage mode, forecast and learning options. Its
  // rival_types are rebuilt from cost_levels, holding and salvage.
  policy::PolicyConfig policy;
  std::uint64_t master_seed = 20240601;
  std::vector<PolicyKind> policies = {std::begin(policy::kAllPolicies),
                                      std::end(policy::kAllPolicies)};
  PolicyAssignment assignment = PolicyAssignment::kBothSame;
  PolicyKind mixed_opponent = PolicyKind::kBayesianRiskNeutral;
  int bootstrap_resamples = 10000;
  double bootstrap_level = 0.95;
  int threads = 1;

  // Throws InvalidArgument naming the offending field.
  void Validate() const;
  // policy with rival_types filled in from the cost levels.
  policy::PolicyConfig EffectivePolicyConfig() const;
};

struct PeriodRecord {
  std::array<market::Action, 2> actions;
  std::array<double, 2> latent_demand{};
  std::array<double, 2> sales{};
  std::array<bool, 2> stockout{};
  std::array<double, 2> profit{};
  std::array<double, 2> inventory_after{};
  // Probability each firm assigns to its rival being high-cost, after the
  // period's update.
  std::array<double, 2> belief_high_cost{};
  // Posterior MSE of the shared demand posterior after the period's update.
  double mse = 0.0;
  // sum_{s <= t} delta^{s-1} (profit_1s + profit_2s).
  double cumulative_market_profit = 0.0;
};

struct ReplicationRecord {
  PolicyKind policy = PolicyKind::kProposedCredibleRisk;
  int replication = 0;
  std::array<market::FirmType, 2> types;
  std::vector<PeriodRecord> periods;
  std::array<double, 2> discounted_profit{};
  double market_profit = 0.0;
  double final_mse = 0.0;
};

ReplicationRecord RunReplication(const SimConfig& config, PolicyKind policy,
                                 int replication);

struct Curves {
  std::vector<double> cumulative_profit;  // mean cumulative market profit
  std::vector<double> stockout_rate;      // over both firms
  std::vector<double> mean_price;
  std::vector<double> mean_quantity;
  std::vector<double> mse;
  std::vector<double> belief_high_cost;   // over both firms
};

struct PolicySummary {
  PolicyKind policy = PolicyKind::kProposedCredibleRisk;
  int replications = 0;
  double mean_market_profit = 0.0;
  double sd_market_profit = 0.0;  // 0 when replications == 1
  double median_market_profit = 0.0;
  double mean_final_mse = 0.0;
  double sd_final_mse = 0.0;
  std::array<double, 2> mean_firm_profit{};
  Curves curves;
};

struct ExperimentSummary {
  std::vector<PolicySummary> policies;
  // records[i] holds the replications of policies[i] in index order.
  std::vector<std::vector<ReplicationRecord>> records;

  const PolicySummary* Find(PolicyKind kind) const;
  const std::vector<ReplicationRecord>* RecordsFor(PolicyKind kind) const;
};

PolicySummary Summarize(PolicyKind policy,
                        std::span<const ReplicationRecord> records);

// Runs config.replications replications per configured policy on
// config.threads worker threads; the result does not depend on the thread
// count.
ExperimentSummary RunExperiment(const SimConfig& config);

struct Interval {
  double mean_diff = 0.0;
  double low = 0.0;
  double high = 0.0;
};

// Percentile bootstrap of mean(a) - mean(b), resampling a and b
// independently with replacement.
Interval BootstrapMeanDiff(std::span<const double> a, std::span<const double> b,
                           int resamples, double level, RandomStream& rng);

struct BootstrapReport {
  PolicyKind policy = PolicyKind::kProposedCredibleRisk;
  PolicyKind baseline = PolicyKind::kProposedCredibleRisk;
  double mean_diff_profit = 0.0;
  double profit_low = 0.0;
  double profit_high = 0.0;
  double mean_diff_mse = 0.0;
  double mse_low = 0.0;
  double mse_high = 0.0;
  int resamples = 0;
  double level = 0.95;
};

BootstrapReport BootstrapDiff(std::span<const ReplicationRecord> a,
                              std::span<const ReplicationRecord> b,
                              int resamples, double level, RandomStream& rng);

// Proposed-versus-baseline comparisons present in `summary`, each on its own
// stream derived from master_seed.
std::vector<BootstrapReport> BootstrapAgainstBaselines(
    const ExperimentSummary& summary, const SimConfig& config);

// Per period, the fraction of index-matched replication pairs whose
// cumulative discounted market profit is strictly larger under `proposed`.
std::vector<double> DominanceCurve(std::span<const ReplicationRecord> proposed,
                                   std::span<const ReplicationRecord> baseline);

struct RelativeImprovement {
  PolicyKind baseline = PolicyKind::kClassicalStaticPrior;
  // Empty when the baseline profit is 0.
  std::optional<double> profit_gain_pct;
  std::optional<double> mse_reduction_pct;
};

RelativeImprovement Relative(double proposed_profit, double baseline_profit,
                             double proposed_mse, double baseline_mse);

// One row per baseline present alongside the proposed policy. Throws
// InvalidArgument if the proposed policy is missing.
std::vector<RelativeImprovement> SummarizeRelative(
    const ExperimentSummary& summary);

}  // namespace crgame::sim

#endif  // CRGAME_SIMHARNESS_H_
