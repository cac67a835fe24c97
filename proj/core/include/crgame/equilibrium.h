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

// Discounted dynamic programming over a finite set of belief-state nodes
// shared by two firms: the credible-risk Bellman operator, value iteration,
// alternating best-response iteration and a numerical contraction check.
//
// A GameModel supplies, for each firm, node, own action and rival action,
// the one-step credible-risk reward and a finite transition distribution
// over next nodes. The rival's action at a node is read from its GridPolicy.

#ifndef CRGAME_EQUILIBRIUM_H_
#define CRGAME_EQUILIBRIUM_H_

#include <array>
#include <vector>

#include "crgame/numerics.h"
#include "crgame/rng.h"

namespace crgame::equilibrium {

struct Transition {
  int node = 0;
  double prob = 0.0;
};

struct ValueFunction {
  std::vector<double> values;
};

// Action index per node.
struct GridPolicy {
  std::vector<int> actions;
  friend bool operator==(const GridPolicy&, const GridPolicy&) = default;
};

struct IterationDiagnostics {
  std::vector<double> sup_norm_deltas;
  std::vector<int> policy_change_counts;
  bool converged = false;
};

class GameModel {
 public:
  virtual ~GameModel() = default;

  virtual int num_nodes() const = 0;
  virtual int num_actions(int firm) const = 0;
  virtual double discount() const = 0;

  virtual double Reward(int firm, int node, int action,
                        int rival_action) const = 0;
  // Replaces `out` with the next-node distribution; probabilities sum to 1.
  virtual void Transitions(int firm, int node, int action, int rival_action,
                           std::vector<Transition>& out) const = 0;

  // Hook run between best-response sweeps; returns true if the model's
  // rewards or transitions changed.
  virtual bool Refresh(const std::array<GridPolicy, 2>& /*policies*/) {
    return false;
  }
};

// Firm `firm`'s Markov decision problem against a fixed rival policy, with
// rewards and transitions tabulated once.
class BestResponseProblem {
 public:
  BestResponseProblem(const GameModel& model, int firm,
                      const GridPolicy& rival_policy);

  int num_nodes() const { return num_nodes_; }
  int num_actions() const { return num_actions_; }
  double discount() const { return discount_; }
  double reward(int node, int action) const {
    return rewards_[static_cast<std::size_t>(node) * num_actions_ + action];
  }
  // max |reward| over the tabulated (node, action) pairs.
  double max_abs_reward() const { return max_abs_reward_; }

  // One application of the Bellman operator. The greedy policy keeps the
  // lowest action index among ties.
  double Backup(const ValueFunction& value, int node, int* best_action) const;
  void Apply(const ValueFunction& value, ValueFunction* next,
             GridPolicy* greedy) const;

 private:
  int num_nodes_;
  int num_actions_;
  double discount_;
  double max_abs_reward_ = 0.0;
  std::vector<double> rewards_;
  // CSR layout over (node, action) pairs.
  std::vector<std::size_t> offsets_;
  std::vector<Transition> transitions_;
};

struct BellmanResult {
  ValueFunction value;
  GridPolicy policy;
};

BellmanResult BellmanApply(const ValueFunction& value,
                           const GridPolicy& rival_policy,
                           const GameModel& model, int firm);

struct ValueIterationOptions {
  double tolerance = 1e-6;
  int max_iterations = 100000;
};

struct ValueIterationResult {
  ValueFunction value;
  GridPolicy policy;
  IterationDiagnostics diagnostics;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, IterationDiagnostics diagnostics)
      : Error(what), diagnostics_(std::move(diagnostics)) {}
  const IterationDiagnostics& diagnostics() const { return diagnostics_; }

 private:
  IterationDiagnostics diagnostics_;
};

// Iterates the Bellman operator from `initial` (zeros if empty) until the
// sup-norm change drops below options.tolerance. Throws ConvergenceError if
// max_iterations is reached first, and InvalidArgument unless the discount
// lies in [0, 1).
ValueIterationResult ValueIterate(const BestResponseProblem& problem,
                                  const ValueIterationOptions& options,
                                  const ValueFunction& initial = {});
ValueIterationResult ValueIterate(const GameModel& model, int firm,
                                  const GridPolicy& rival_policy,
                                  const ValueIterationOptions& options,
                                  const ValueFunction& initial = {});

enum class UpdateScheme {
  kAlternating,   // firm 1 responds to firm 0's freshly updated policy
  kSimultaneous,  // both respond to the previous sweep's policies
};

struct EquilibriumOptions {
  int max_sweeps = 50;
  UpdateScheme scheme = UpdateScheme::kAlternating;
  ValueIterationOptions value_iteration;
  // Starting policies; when empty every node plays action `initial_action`.
  std::array<GridPolicy, 2> initial_policies;
  int initial_action = 0;
};

struct EquilibriumResult {
  std::array<GridPolicy, 2> policies;
  std::array<ValueFunction, 2> values;
  // Per sweep: max over firms of the sup-norm value change and the total
  // number of nodes whose action changed.
  IterationDiagnostics diagnostics;
  int sweeps = 0;
};

// Best-response iteration. Returns the last iterate with converged = false
// if the sweep cap is hit (pure-strategy cycling is reported, not resolved).
EquilibriumResult EquilibriumIteration(GameModel& model,
                                       const EquilibriumOptions& options);

struct ContractionWitness {
  int trial = 0;
  double lhs = 0.0;  // ||TV - TW||_inf
  double rhs = 0.0;  // delta * ||V - W||_inf + slack
  std::vector<double> v;
  std::vector<double> w;
};

struct ContractionReport {
  int trials = 0;
  double discount = 0.0;
  double max_ratio = 0.0;
  // | ||T(W + c) - TW||_inf - delta |c| | for a random W and constant c.
  double constant_shift_error = 0.0;
  bool passed = true;
  std::vector<ContractionWitness> violations;
};

inline constexpr double kContractionSlack = 1e-9;

// Draws `trials` pairs of value functions uniform on [-R, R] with
// R = max_abs_reward / (1 - delta) and checks
// ||TV - TW|| <= delta ||V - W|| + kContractionSlack.
ContractionReport ContractionCheck(const BestResponseProblem& problem,
                                   int trials, RandomStream& rng);

// Fully enumerated two-player game; used for hand-checkable instances.
class TabularGame : public GameModel {
 public:
  TabularGame(int num_nodes, std::array<int, 2> num_actions, double discount);

  void SetReward(int firm, int node, int action, int rival_action,
                 double reward);
  void SetTransitions(int firm, int node, int action, int rival_action,
                      std::vector<Transition> transitions);

  int num_nodes() const override { return num_nodes_; }
  int num_actions(int firm) const override { return num_actions_[firm]; }
  double discount() const override { return discount_; }
  double Reward(int firm, int node, int action,
                int rival_action) const override;
  void Transitions(int firm, int node, int action, int rival_action,
                   std::vector<Transition>& out) const override;

 private:
  std::size_t Slot(int firm, int node, int action, int rival_action) const;

  int num_nodes_;
  std::array<int, 2> num_actions_;
  double discount_;
  std::array<std::vector<double>, 2> rewards_;
  std::array<std::vector<std::vector<Transition>>, 2> transitions_;
};

}  // namespace crgame::equilibrium

#endif  // CRGAME_EQUILIBRIUM_H_
