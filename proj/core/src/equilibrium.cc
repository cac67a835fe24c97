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
#include <string>
#include <utility>

namespace crgame::equilibrium {
namespace {

double SupNormDistance(const std::vector<double>& a,
                       const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a[i] - b[i]));
  }
  return d;
}

int CountChanges(const GridPolicy& a, const GridPolicy& b) {
  int changes = 0;
  for (std::size_t i = 0; i < a.actions.size(); ++i) {
    if (a.actions[i] != b.actions[i]) ++changes;
  }
  return changes;
}

void CheckDiscount(double discount) {
  if (!(discount >= 0.0 && discount < 1.0)) {
    throw InvalidArgument("discount must lie in [0, 1)");
  }
}

}  // namespace

BestResponseProblem::BestResponseProblem(const GameModel& model, int firm,
                                         const GridPolicy& rival_policy)
    : num_nodes_(model.num_nodes()),
      num_actions_(model.num_actions(firm)),
      discount_(model.discount()) {
  if (firm != 0 && firm != 1) throw InvalidArgument("firm must be 0 or 1");
  if (static_cast<int>(rival_policy.actions.size()) != num_nodes_) {
    throw InvalidArgument("rival policy does not cover every node");
  }
  const std::size_t pairs =
      static_cast<std::size_t>(num_nodes_) * num_actions_;
  rewards_.resize(pairs);
  offsets_.reserve(pairs + 1);
  offsets_.push_back(0);
  std::vector<Transition> scratch;
  for (int node = 0; node < num_nodes_; ++node) {
    const int rival_action = rival_policy.actions[node];
    for (int action = 0; action < num_actions_; ++action) {
      const double r = model.Reward(firm, node, action, rival_action);
      rewards_[static_cast<std::size_t>(node) * num_actions_ + action] = r;
      max_abs_reward_ = std::max(max_abs_reward_, std::abs(r));
      model.Transitions(firm, node, action, rival_action, scratch);
      transitions_.insert(transitions_.end(), scratch.begin(), scratch.end());
      offsets_.push_back(transitions_.size());
    }
  }
}

double BestResponseProblem::Backup(const ValueFunction& value, int node,
                                   int* best_action) const {
  double best = -std::numeric_limits<double>::infinity();
  int argmax = 0;
  const std::size_t base = static_cast<std::size_t>(node) * num_actions_;
  for (int action = 0; action < num_actions_; ++action) {
    const std::size_t pair = base + action;
    double continuation = 0.0;
    for (std::size_t t = offsets_[pair]; t < offsets_[pair + 1]; ++t) {
      continuation += transitions_[t].prob * value.values[transitions_[t].node];
    }
    const double q = rewards_[pair] + discount_ * continuation;
    if (q > best) {
      best = q;
      argmax = action;
    }
  }
  if (best_action != nullptr) *best_action = argmax;
  return best;
}

void BestResponseProblem::Apply(const ValueFunction& value,
                                ValueFunction* next,
                                GridPolicy* greedy) const {
  if (static_cast<int>(value.values.size()) != num_nodes_) {
    throw InvalidArgument("value function does not cover every node");
  }
  next->values.resize(num_nodes_);
  if (greedy != nullptr) greedy->actions.resize(num_nodes_);
  for (int node = 0; node < num_nodes_; ++node) {
    int action = 0;
    next->values[node] = Backup(value, node, &action);
    if (greedy != nullptr) greedy->actions[node] = action;
  }
}

BellmanResult BellmanApply(const ValueFunction& value,
                           const GridPolicy& rival_policy,
                           const GameModel& model, int firm) {
  const BestResponseProblem problem(model, firm, rival_policy);
  BellmanResult out;
  problem.Apply(value, &out.value, &out.policy);
  return out;
}

ValueIterationResult ValueIterate(const BestResponseProblem& problem,
                                  const ValueIterationOptions& options,
                                  const ValueFunction& initial) {
  CheckDiscount(problem.discount());
  ValueIterationResult result;
  result.value = initial;
  if (result.value.values.empty()) {
    result.value.values.assign(problem.num_nodes(), 0.0);
  }
  ValueFunction next;
  GridPolicy greedy;
  for (int it = 0; it < options.max_iterations; ++it) {
    problem.Apply(result.value, &next, &greedy);
    const double delta = SupNormDistance(next.values, result.value.values);
    result.diagnostics.sup_norm_deltas.push_back(delta);
    result.diagnostics.policy_change_counts.push_back(
        it == 0 ? problem.num_nodes() : CountChanges(greedy, result.policy));
    std::swap(result.value, next);
    result.policy = greedy;
    if (delta < options.tolerance) {
      result.diagnostics.converged = true;
      return result;
    }
  }
  throw ConvergenceError("value iteration did not converge within " +
                             std::to_string(options.max_iterations) +
                             " iterations",
                         std::move(result.diagnostics));
}

ValueIterationResult ValueIterate(const GameModel& model, int firm,
                                  const GridPolicy& rival_policy,
                                  const ValueIterationOptions& options,
                                  const ValueFunction& initial) {
  return ValueIterate(BestResponseProblem(model, firm, rival_policy), options,
                      initial);
}

EquilibriumResult EquilibriumIteration(GameModel& model,
                                       const EquilibriumOptions& options) {
  const int n = model.num_nodes();
  EquilibriumResult result;
  for (int firm = 0; firm < 2; ++firm) {
    GridPolicy& p = result.policies[firm];
    p = options.initial_policies[firm];
    if (p.actions.empty()) p.actions.assign(n, options.initial_action);
    if (static_cast<int>(p.actions.size()) != n) {
      throw InvalidArgument("initial policy does not cover every node");
    }
    for (int a : p.actions) {
      if (a < 0 || a >= model.num_actions(firm)) {
        throw InvalidArgument("initial policy action out of range");
      }
    }
    result.values[firm].values.assign(n, 0.0);
  }

  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    const std::array<GridPolicy, 2> previous = result.policies;
    double sup_delta = 0.0;
    int changes = 0;
    for (int firm = 0; firm < 2; ++firm) {
      const GridPolicy& rival =
          options.scheme == UpdateScheme::kAlternating
              ? result.policies[1 - firm]
              : previous[1 - firm];
      ValueIterationResult br = ValueIterate(
          model, firm, rival, options.value_iteration, result.values[firm]);
      sup_delta = std::max(sup_delta, SupNormDistance(br.value.values,
                                                      result.values[firm].values));
      changes += CountChanges(br.policy, previous[firm]);
      result.values[firm] = std::move(br.value);
      result.policies[firm] = std::move(br.policy);
    }
    result.diagnostics.sup_norm_deltas.push_back(sup_delta);
    result.diagnostics.policy_change_counts.push_back(changes);
    result.sweeps = sweep + 1;
    const bool model_changed = model.Refresh(result.policies);
    if (changes == 0 && !model_changed) {
      result.diagnostics.converged = true;
      break;
    }
  }
  return result;
}

ContractionReport ContractionCheck(const BestResponseProblem& problem,
                                   int trials, RandomStream& rng) {
  CheckDiscount(problem.discount());
  ContractionReport report;
  report.trials = trials;
  report.discount = problem.discount();
  const int n = problem.num_nodes();
  const double radius =
      problem.max_abs_reward() > 0.0
          ? problem.max_abs_reward() / (1.0 - problem.discount())
          : 1.0;
  auto random_value = [&]() {
    ValueFunction v;
    v.values.resize(n);
    for (double& x : v.values) x = radius * (2.0 * rng.Uniform() - 1.0);
    return v;
  };

  ValueFunction tv, tw;
  for (int trial = 0; trial < trials; ++trial) {
    const ValueFunction v = random_value();
    const ValueFunction w = random_value();
    problem.Apply(v, &tv, nullptr);
    problem.Apply(w, &tw, nullptr);
    const double lhs = SupNormDistance(tv.values, tw.values);
    const double dist = SupNormDistance(v.values, w.values);
    const double rhs = problem.discount() * dist + kContractionSlack;
    if (dist > 0.0) report.max_ratio = std::max(report.max_ratio, lhs / dist);
    if (lhs > rhs) {
      report.passed = false;
      report.violations.push_back({trial, lhs, rhs, v.values, w.values});
    }
  }

  const ValueFunction w = random_value();
  const double shift = radius * (2.0 * rng.Uniform() - 1.0);
  ValueFunction shifted = w;
  for (double& x : shifted.values) x += shift;
  problem.Apply(w, &tw, nullptr);
  problem.Apply(shifted, &tv, nullptr);
  report.constant_shift_error =
      std::abs(SupNormDistance(tv.values, tw.values) -
               problem.discount() * std::abs(shift));
  if (report.constant_shift_error > kContractionSlack) report.passed = false;
  return report;
}

TabularGame::TabularGame(int num_nodes, std::array<int, 2> num_actions,
                         double discount)
    : num_nodes_(num_nodes), num_actions_(num_actions), discount_(discount) {
  if (num_nodes < 1 || num_actions[0] < 1 || num_actions[1] < 1) {
    throw InvalidArgument("tabular game needs nodes and actions");
  }
  const std::size_t slots = static_cast<std::size_t>(num_nodes) *
                            num_actions[0] * num_actions[1];
  for (int firm = 0; firm < 2; ++firm) {
    rewards_[firm].assign(slots, 0.0);
    transitions_[firm].resize(slots);
    for (int node = 0; node < num_nodes; ++node) {
      for (int a = 0; a < num_actions_[firm]; ++a) {
        for (int b = 0; b < num_actions_[1 - firm]; ++b) {
          transitions_[firm][Slot(firm, node, a, b)] = {{node, 1.0}};
        }
      }
    }
  }
}

std::size_t TabularGame::Slot(int firm, int node, int action,
                              int rival_action) const {
  if (node < 0 || node >= num_nodes_ || action < 0 ||
      action >= num_actions_[firm] || rival_action < 0 ||
      rival_action >= num_actions_[1 - firm]) {
    throw InvalidArgument("tabular game index out of range");
  }
  return (static_cast<std::size_t>(node) * num_actions_[firm] + action) *
             num_actions_[1 - firm] +
         rival_action;
}

void TabularGame::SetReward(int firm, int node, int action, int rival_action,
                            double reward) {
  rewards_.at(firm)[Slot(firm, node, action, rival_action)] = reward;
}

void TabularGame::SetTransitions(int firm, int node, int action,
                                 int rival_action,
                                 std::vector<Transition> transitions) {
  double total = 0.0;
  for (const Transition& t : transitions) {
    if (t.node < 0 || t.node >= num_nodes_ || t.prob < 0.0) {
      throw InvalidArgument("invalid transition");
    }
    total += t.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidArgument("transition probabilities must sum to 1");
  }
  transitions_.at(firm)[Slot(firm, node, action, rival_action)] =
      std::move(transitions);
}

double TabularGame::Reward(int firm, int node, int action,
                           int rival_action) const {
  return rewards_.at(firm)[Slot(firm, node, action, rival_action)];
}

void TabularGame::Transitions(int firm, int node, int action, int rival_action,
                              std::vector<Transition>& out) const {
  out = transitions_.at(firm)[Slot(firm, node, action, rival_action)];
}

}  // namespace crgame::equilibrium
