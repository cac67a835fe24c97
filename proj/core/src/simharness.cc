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

#include "crgame/simharness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "crgame/numerics.h"

namespace crgame::sim {
namespace {

constexpr std::uint32_t kSharedPolicySlot = 0;

std::uint32_t PolicySlot(PolicyKind kind) {
  return static_cast<std::uint32_t>(kind) + 1;
}

RandomStream Stream(const SimConfig& config, std::uint32_t policy_slot,
                    int replication, int firm, int period,
                    StreamPurpose purpose) {
  StreamKey key;
  key.master_seed = config.master_seed;
  key.policy = policy_slot;
  key.replication = static_cast<std::uint32_t>(replication);
  key.firm = static_cast<std::uint32_t>(firm);
  key.period = static_cast<std::uint32_t>(period);
  key.purpose = purpose;
  return RandomStream(key);
}

bool Learns(PolicyKind kind) {
  return kind != PolicyKind::kClassicalStaticPrior;
}

double SampleSd(std::span<const double> xs) {
  return xs.size() < 2 ? 0.0 : SampleStdDev(xs);
}

}  // namespace

void SimConfig::Validate() const {
  auto fail = [](const std::string& field, const std::string& rule) {
    throw InvalidArgument(field + ": " + rule);
  };
  if (horizon < 1) fail("horizon", "must be >= 1");
  if (replications < 1) fail("replications", "must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) fail("delta", "must lie in (0, 1)");
  if (!(cost_levels[0] > 0.0 && cost_levels[0] < cost_levels[1])) {
    fail("cost_levels", "must satisfy 0 < c_L < c_H");
  }
  for (double rho : high_cost_prob) {
    if (!(rho >= 0.0 && rho <= 1.0)) fail("high_cost_prob", "must lie in [0, 1]");
  }
  if (holding < 0.0) fail("holding", "must be >= 0");
  if (salvage < 0.0) fail("salvage", "must be >= 0");
  if (!(salvage < cost_levels[0])) fail("salvage", "must be below c_L");
  if (initial_inventory < 0.0) fail("initial_inventory", "must be >= 0");
  if (policies.empty()) fail("policies", "must name at least one policy");
  if (bootstrap_resamples < 1000) fail("bootstrap_resamples", "must be >= 1000");
  if (!(bootstrap_level > 0.0 && bootstrap_level < 1.0)) {
    fail("bootstrap_level", "must lie in (0, 1)");
  }
  if (threads < 1) fail("threads", "must be >= 1");
  truth.Validate();
  prior.Validate();
  EffectivePolicyConfig().Validate();
}

policy::PolicyConfig SimConfig::EffectivePolicyConfig() const {
  policy::PolicyConfig out = policy;
  out.rival_types = {{cost_levels[0], holding, salvage},
                     {cost_levels[1], holding, salvage}};
  return out;
}

ReplicationRecord RunReplication(const SimConfig& config, PolicyKind policy,
                                 int replication) {
  const policy::PolicyConfig pc = config.EffectivePolicyConfig();
  const std::array<PolicyKind, 2> kinds = {
      policy, config.assignment == PolicyAssignment::kBothSame
                  ? policy
                  : config.mixed_opponent};
  const std::uint32_t slot = PolicySlot(policy);

  ReplicationRecord record;
  record.policy = policy;
  record.replication = replication;
  for (int f = 0; f < 2; ++f) {
    RandomStream rng = Stream(config, kSharedPolicySlot, replication, f, 0,
                              StreamPurpose::kCostDraw);
    const bool high = rng.Uniform() < config.high_cost_prob[f];
    record.types[f] = {config.cost_levels[high ? 1 : 0], config.holding,
                       config.salvage};
  }

  const bool any_learner = Learns(kinds[0]) || Learns(kinds[1]);
  learning::DemandLearner learner(config.prior, pc.learning);
  std::array<learning::TypeBelief, 2> beliefs;
  for (int f = 0; f < 2; ++f) {
    // Belief of firm f about firm 1 - f.
    const double rho = config.high_cost_prob[1 - f];
    beliefs[f].probs = {1.0 - rho, rho};
  }
  market::MarketState state;
  state.inventory = {config.initial_inventory, config.initial_inventory};
  std::array<std::optional<market::Action>, 2> last_action;

  double discount = 1.0;
  double cumulative = 0.0;
  record.periods.reserve(config.horizon);
  for (int t = 1; t <= config.horizon; ++t) {
    const bool terminal = t == config.horizon;
    std::array<policy::BeliefState, 2> views;
    std::array<market::Action, 2> actions;
    for (int f = 0; f < 2; ++f) {
      policy::BeliefState& v = views[f];
      v.inventory = state.inventory[f];
      v.own_type = record.types[f];
      v.demand_posterior = learner.posterior();
      v.rival_type_belief = beliefs[f];
      v.last_rival_action = last_action[1 - f];
      v.last_rival_stockout = state.last_stockout[1 - f];
      v.rival_inventory = state.inventory[1 - f];
      v.last_own_action = last_action[f];
      v.last_own_stockout = state.last_stockout[f];
      v.terminal_period = terminal;
      RandomStream rng = Stream(config, slot, replication, f, t,
                                StreamPurpose::kActionSelection);
      actions[f] = policy::SelectAction(v, pc, kinds[f], rng).action;
    }

    RandomStream noise = Stream(config, kSharedPolicySlot, replication, 0, t,
                                StreamPurpose::kDemandNoise);
    const market::PeriodResult result = market::SimulatePeriod(
        state, actions, config.truth, record.types, noise, terminal,
        pc.salvage_mode);

    for (int f = 0; f < 2; ++f) {
      if (!Learns(kinds[f])) continue;
      RandomStream rng = Stream(config, slot, replication, f, t,
                                StreamPurpose::kTypeLikelihood);
      const std::vector<double> lik = policy::RivalActionLikelihoods(
          views[f], actions[1 - f], pc, kinds[1 - f], rng);
      beliefs[f] = learning::UpdateTypeBelief(beliefs[f], lik).belief;
    }

    if (any_learner) {
      std::array<learning::ObservationRecord, 2> obs;
      for (int f = 0; f < 2; ++f) {
        const market::PeriodOutcome& o = result.outcomes[f];
        obs[f].covariate = market::CovariateVector(
            actions[f].price, actions[1 - f].price, state.last_stockout[1 - f]);
        obs[f].stock = state.inventory[f] + actions[f].quantity;
        obs[f].censored = o.stockout;
        obs[f].sales = o.stockout ? obs[f].stock : o.latent_demand;
      }
      RandomStream rng = Stream(config, slot, replication, 0, t,
                                StreamPurpose::kImputation);
      learner.ObserveAll(obs, rng);
    }

    PeriodRecord period;
    period.actions = actions;
    for (int f = 0; f < 2; ++f) {
      const market::PeriodOutcome& o = result.outcomes[f];
      period.latent_demand[f] = o.latent_demand;
      period.sales[f] = o.sales;
      period.stockout[f] = o.stockout;
      period.profit[f] = o.profit;
      period.inventory_after[f] = o.next_inventory;
      period.belief_high_cost[f] = beliefs[f].probs[1];
      record.discounted_profit[f] += discount * o.profit;
    }
    cumulative += discount * (period.profit[0] + period.profit[1]);
    period.cumulative_market_profit = cumulative;
    period.mse = learning::PosteriorMse(learner.posterior(), config.truth);
    record.periods.push_back(period);

    last_action = {actions[0], actions[1]};
    state = result.next_state;
    discount *= config.delta;
  }
  record.market_profit = cumulative;
  record.final_mse = record.periods.back().mse;
  return record;
}

const PolicySummary* ExperimentSummary::Find(PolicyKind kind) const {
  for (const PolicySummary& p : policies) {
    if (p.policy == kind) return &p;
  }
  return nullptr;
}

const std::vector<ReplicationRecord>* ExperimentSummary::RecordsFor(
    PolicyKind kind) const {
  for (std::size_t i = 0; i < policies.size(); ++i) {
    if (policies[i].policy == kind) return &records[i];
  }
  return nullptr;
}

PolicySummary Summarize(PolicyKind policy,
                        std::span<const ReplicationRecord> records) {
  if (records.empty()) throw InvalidArgument("no replications to summarize");
  PolicySummary s;
  s.policy = policy;
  s.replications = static_cast<int>(records.size());
  std::vector<double> profit, mse, firm0, firm1;
  for (const ReplicationRecord& r : records) {
    profit.push_back(r.market_profit);
    mse.push_back(r.final_mse);
    firm0.push_back(r.discounted_profit[0]);
    firm1.push_back(r.discounted_profit[1]);
  }
  s.mean_market_profit = Mean(profit);
  s.sd_market_profit = SampleSd(profit);
  s.median_market_profit = Median(profit);
  s.mean_final_mse = Mean(mse);
  s.sd_final_mse = SampleSd(mse);
  s.mean_firm_profit = {Mean(firm0), Mean(firm1)};

  const std::size_t horizon = records.front().periods.size();
  const double n = static_cast<double>(records.size());
  Curves& c = s.curves;
  for (std::vector<double>* v :
       {&c.cumulative_profit, &c.stockout_rate, &c.mean_price,
        &c.mean_quantity, &c.mse, &c.belief_high_cost}) {
    v->assign(horizon, 0.0);
  }
  for (const ReplicationRecord& r : records) {
    if (r.periods.size() != horizon) {
      throw InvalidArgument("replications have different horizons");
    }
    for (std::size_t t = 0; t < horizon; ++t) {
      const PeriodRecord& p = r.periods[t];
      c.cumulative_profit[t] += p.cumulative_market_profit / n;
      c.stockout_rate[t] += (p.stockout[0] + p.stockout[1]) / (2.0 * n);
      c.mean_price[t] += (p.actions[0].price + p.actions[1].price) / (2.0 * n);
      c.mean_quantity[t] +=
          (p.actions[0].quantity + p.actions[1].quantity) / (2.0 * n);
      c.mse[t] += p.mse / n;
      c.belief_high_cost[t] +=
          (p.belief_high_cost[0] + p.belief_high_cost[1]) / (2.0 * n);
    }
  }
  return s;
}

ExperimentSummary RunExperiment(const SimConfig& config) {
  config.Validate();
  const int num_policies = static_cast<int>(config.policies.size());
  const int reps = config.replications;
  ExperimentSummary out;
  out.records.assign(num_policies, std::vector<ReplicationRecord>(reps));

  const int tasks = num_policies * reps;
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (int task = next++; task < tasks; task = next++) {
      const int p = task / reps;
      const int r = task % reps;
      try {
        out.records[p][r] = RunReplication(config, config.policies[p], r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = tasks;
      }
    }
  };
  const int workers = std::min(config.threads, tasks);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (int p = 0; p < num_policies; ++p) {
    out.policies.push_back(Summarize(config.policies[p], out.records[p]));
  }
  return out;
}

Interval BootstrapMeanDiff(std::span<const double> a, std::span<const double> b,
                           int resamples, double level, RandomStream& rng) {
  if (a.empty() || b.empty()) throw InvalidArgument("bootstrap: empty sample");
  if (resamples < 1) throw InvalidArgument("bootstrap: resamples must be >= 1");
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidArgument("bootstrap: level must lie in (0, 1)");
  }
  auto pick = [&rng](std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
  };
  std::vector<double> diffs(resamples);
  for (double& d : diffs) {
    double sa = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sa += a[pick(a.size())];
    double sb = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) sb += b[pick(b.size())];
    d = sa / a.size() - sb / b.size();
  }
  Interval out;
  out.mean_diff = Mean(a) - Mean(b);
  const double tail = 0.5 * (1.0 - level);
  out.low = Quantile(diffs, tail);
  out.high = Quantile(diffs, 1.0 - tail);
  return out;
}

BootstrapReport BootstrapDiff(std::span<const ReplicationRecord> a,
                              std::span<const ReplicationRecord> b,
                              int resamples, double level, RandomStream& rng) {
  std::vector<double> pa, pb, ma, mb;
  for (const ReplicationRecord& r : a) {
    pa.push_back(r.market_profit);
    ma.push_back(r.final_mse);
  }
  for (const ReplicationRecord& r : b) {
    pb.push_back(r.market_profit);
    mb.push_back(r.final_mse);
  }
  RandomStream mse_rng = rng.Fork(1);
  const Interval profit = BootstrapMeanDiff(pa, pb, resamples, level, rng);
  const Interval mse = BootstrapMeanDiff(ma, mb, resamples, level, mse_rng);
  BootstrapReport out;
  if (!a.empty()) out.policy = a.front().policy;
  if (!b.empty()) out.baseline = b.front().policy;
  out.mean_diff_profit = profit.mean_diff;
  out.profit_low = profit.low;
  out.profit_high = profit.high;
  out.mean_diff_mse = mse.mean_diff;
  out.mse_low = mse.low;
  out.mse_high = mse.high;
  out.resamples = resamples;
  out.level = level;
  return out;
}

std::vector<BootstrapReport> BootstrapAgainstBaselines(
    const ExperimentSummary& summary, const SimConfig& config) {
  std::vector<BootstrapReport> out;
  const auto* proposed = summary.RecordsFor(PolicyKind::kProposedCredibleRisk);
  if (proposed == nullptr) return out;
  for (PolicyKind baseline : {PolicyKind::kBayesianRiskNeutral,
                              PolicyKind::kClassicalStaticPrior}) {
    const auto* records = summary.RecordsFor(baseline);
    if (records == nullptr) continue;
    RandomStream rng = Stream(config, PolicySlot(baseline), 0, 0, 0,
                              StreamPurpose::kBootstrap);
    out.push_back(BootstrapDiff(*proposed, *records,
                                config.bootstrap_resamples,
                                config.bootstrap_level, rng));
  }
  return out;
}

std::vector<double> DominanceCurve(
    std::span<const ReplicationRecord> proposed,
    std::span<const ReplicationRecord> baseline) {
  if (proposed.size() != baseline.size() || proposed.empty()) {
    throw InvalidArgument(
        "dominance curve: record sets must be nonempty and equally sized");
  }
  const std::size_t horizon = proposed.front().periods.size();
  std::vector<double> curve(horizon, 0.0);
  for (std::size_t r = 0; r < proposed.size(); ++r) {
    if (proposed[r].periods.size() != horizon ||
        baseline[r].periods.size() != horizon) {
      throw InvalidArgument("dominance curve: horizons differ");
    }
    for (std::size_t t = 0; t < horizon; ++t) {
      if (proposed[r].periods[t].cumulative_market_profit >
          baseline[r].periods[t].cumulative_market_profit) {
        curve[t] += 1.0;
      }
    }
  }
  for (double& c : curve) c /= static_cast<double>(proposed.size());
  return curve;
}

RelativeImprovement Relative(double proposed_profit, double baseline_profit,
                             double proposed_mse, double baseline_mse) {
  RelativeImprovement out;
  if (baseline_profit != 0.0) {
    out.profit_gain_pct =
        100.0 * (proposed_profit - baseline_profit) / std::abs(baseline_profit);
  }
  if (baseline_mse != 0.0) {
    out.mse_reduction_pct = 100.0 * (baseline_mse - proposed_mse) / baseline_mse;
  }
  return out;
}

std::vector<RelativeImprovement> SummarizeRelative(
    const ExperimentSummary& summary) {
  const PolicySummary* proposed =
      summary.Find(PolicyKind::kProposedCredibleRisk);
  if (proposed == nullptr) {
    throw InvalidArgument("relative table needs the proposed policy");
  }
  std::vector<RelativeImprovement> out;
  for (PolicyKind baseline : {PolicyKind::kClassicalStaticPrior,
                              PolicyKind::kBayesianRiskNeutral}) {
    const PolicySummary* b = summary.Find(baseline);
    if (b == nullptr) continue;
    RelativeImprovement row =
        Relative(proposed->mean_market_profit, b->mean_market_profit,
                 proposed->mean_final_mse, b->mean_final_mse);
    row.baseline = baseline;
    out.push_back(row);
  }
  return out;
}

}  // namespace crgame::sim
