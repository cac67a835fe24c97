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

#include "crgame/market_game.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

namespace crgame::equilibrium {
namespace {

bool StrictlyIncreasing(const std::vector<double>& axis) {
  for (std::size_t k = 1; k < axis.size(); ++k) {
    if (!(axis[k] > axis[k - 1])) return false;
  }
  return true;
}

using AxisWeights = std::vector<std::pair<int, double>>;

AxisWeights ProjectAxis(const std::vector<double>& axis, double v,
                        Projection projection) {
  if (projection == Projection::kNearest) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(axis.size()); ++k) {
      if (std::abs(axis[k] - v) < std::abs(axis[best] - v)) best = k;
    }
    return {{best, 1.0}};
  }
  if (v <= axis.front()) return {{0, 1.0}};
  if (v >= axis.back()) return {{static_cast<int>(axis.size()) - 1, 1.0}};
  const auto upper = std::upper_bound(axis.begin(), axis.end(), v);
  const int hi = static_cast<int>(upper - axis.begin());
  const int lo = hi - 1;
  const double w = (v - axis[lo]) / (axis[hi] - axis[lo]);
  if (w == 0.0) return {{lo, 1.0}};
  return {{lo, 1.0 - w}, {hi, w}};
}

// Merges duplicate nodes, ordering by node index.
void Consolidate(std::vector<Transition>& transitions) {
  std::sort(transitions.begin(), transitions.end(),
            [](const Transition& a, const Transition& b) {
              return a.node < b.node;
            });
  std::size_t write = 0;
  for (std::size_t read = 0; read < transitions.size(); ++read) {
    if (write > 0 && transitions[write - 1].node == transitions[read].node) {
      transitions[write - 1].prob += transitions[read].prob;
    } else {
      transitions[write++] = transitions[read];
    }
  }
  transitions.resize(write);
}

}  // namespace

std::vector<double> GridAxis::Points() const {
  if (count < 2) throw InvalidArgument("grid axis needs at least 2 points");
  if (!(hi > lo)) throw InvalidArgument("grid axis needs hi > lo");
  std::vector<double> points(count);
  for (int k = 0; k < count; ++k) {
    points[k] = lo + (hi - lo) * static_cast<double>(k) / (count - 1);
  }
  points.front() = lo;
  points.back() = hi;
  return points;
}

BeliefGrid::BeliefGrid(std::vector<double> inventory,
                       std::vector<double> intercept,
                       std::vector<double> high_cost_prob)
    : axes_{std::move(inventory), std::move(intercept),
            std::move(high_cost_prob)} {
  for (const auto& axis : axes_) {
    if (axis.size() < 2 || !StrictlyIncreasing(axis)) {
      throw InvalidArgument(
          "belief grid axes need >= 2 strictly increasing points");
    }
  }
  if (axes_[0].front() < 0.0) {
    throw InvalidArgument("belief grid: inventory levels must be >= 0");
  }
  if (axes_[2].front() < 0.0 || axes_[2].back() > 1.0) {
    throw InvalidArgument("belief grid: probabilities must lie in [0, 1]");
  }
  for (double inv : axes_[0]) {
    for (double icpt : axes_[1]) {
      for (double rho : axes_[2]) nodes_.push_back({inv, icpt, rho});
    }
  }
}

std::array<int, 3> BeliefGrid::resolution() const {
  return {static_cast<int>(axes_[0].size()), static_cast<int>(axes_[1].size()),
          static_cast<int>(axes_[2].size())};
}

int BeliefGrid::Index(int inventory, int intercept, int high_cost) const {
  const auto r = resolution();
  return (inventory * r[1] + intercept) * r[2] + high_cost;
}

void BeliefGrid::Project(const BeliefNode& point, double mass,
                         Projection projection,
                         std::vector<Transition>& out) const {
  const AxisWeights wi = ProjectAxis(axes_[0], point.inventory, projection);
  const AxisWeights wm = ProjectAxis(axes_[1], point.intercept, projection);
  const AxisWeights wr =
      ProjectAxis(axes_[2], point.high_cost_prob, projection);
  for (const auto& [i, a] : wi) {
    for (const auto& [j, b] : wm) {
      for (const auto& [k, c] : wr) {
        out.push_back({Index(i, j, k), mass * a * b * c});
      }
    }
  }
}

BeliefGrid BuildBeliefGrid(const BeliefGridConfig& config) {
  const long long count = static_cast<long long>(config.inventory.count) *
                          config.intercept.count *
                          config.high_cost_prob.count;
  if (count > config.max_nodes) {
    throw InvalidArgument(
        "belief grid has " + std::to_string(count) + " nodes, above the " +
        "budget of " + std::to_string(config.max_nodes) +
        "; reduce the axis resolutions or raise max_nodes");
  }
  return BeliefGrid(config.inventory.Points(), config.intercept.Points(),
                    config.high_cost_prob.Points());
}

void MarketGameConfig::Validate() const {
  if (!(discount >= 0.0 && discount < 1.0)) {
    throw InvalidArgument("equilibrium: discount must lie in [0, 1)");
  }
  if (kappa[0] < 0.0 || kappa[1] < 0.0) {
    throw InvalidArgument("equilibrium: kappa must be >= 0");
  }
  if (quadrature_order < 1) {
    throw InvalidArgument("equilibrium: quadrature_order must be >= 1");
  }
  if (!(likelihood_temperature > 0.0)) {
    throw InvalidArgument("equilibrium: likelihood_temperature must be > 0");
  }
  if (!(cost_levels[0] < cost_levels[1])) {
    throw InvalidArgument("equilibrium: cost levels must satisfy c_L < c_H");
  }
  for (const auto& t : firm_types) t.Validate();
  representative.Validate();
}

MarketGameModel::MarketGameModel(MarketGameConfig config)
    : config_(std::move(config)),
      grid_(BuildBeliefGrid(config_.grid)),
      quadrature_(GaussHermiteNormal(config_.quadrature_order)) {
  config_.Validate();
  action_grid_.price_grid = config_.price_grid;
  action_grid_.quantity_grid = config_.quantity_grid;
  action_grid_.Validate();
  num_actions_ = action_grid_.num_actions();
  initial_representative_ = config_.representative;
}

market::Action MarketGameModel::ActionAt(int index) const {
  return action_grid_.ActionAt(index);
}

MarketGameModel::Predictive MarketGameModel::PredictiveAt(
    int node, int action, int rival_action) const {
  const market::Action own = ActionAt(action);
  const market::Action rival = ActionAt(rival_action);
  Predictive p;
  p.x = market::CovariateVector(own.price, rival.price, false);
  market::Covariate m = config_.representative.m;
  m(0) = grid_.node(node).intercept;
  p.mean = p.x.dot(m);
  const double var = config_.learning.NoiseVariance(config_.representative) *
                     (1.0 + p.x.dot(config_.representative.S * p.x));
  p.sd = std::sqrt(var);
  return p;
}

policy::ProfitMoments MarketGameModel::Moments(
    int node, int action, int rival_action,
    const market::FirmType& type) const {
  const Predictive pred = PredictiveAt(node, action, rival_action);
  const market::Action own = ActionAt(action);
  const double stock = grid_.node(node).inventory + own.quantity;
  const double credit =
      config_.salvage_mode == market::SalvageMode::kPerPeriod ? type.salvage
                                                              : 0.0;
  const double carry = type.holding - credit;
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t k = 0; k < quadrature_.nodes.size(); ++k) {
    const double demand = pred.mean + pred.sd * quadrature_.nodes[k];
    const double sales = std::min(std::max(demand, 0.0), stock);
    const double profit = (own.price + carry) * sales -
                          type.cost * own.quantity - carry * stock;
    mean += quadrature_.weights[k] * profit;
    second += quadrature_.weights[k] * profit * profit;
  }
  return {mean, std::sqrt(std::max(second - mean * mean, 0.0))};
}

double MarketGameModel::Reward(int firm, int node, int action,
                               int rival_action) const {
  const policy::ProfitMoments m =
      Moments(node, action, rival_action, config_.firm_types.at(firm));
  return policy::CredibleRiskScore(m.mean, m.sd, config_.kappa.at(firm));
}

double MarketGameModel::LogLikelihoodRatio(int firm, int node, int action,
                                           int rival_action) const {
  // The rival's credible-risk scores against this firm's action, with the
  // rival's cost set to zero; each hypothesis subtracts cost * quantity.
  const int rival = 1 - firm;
  market::FirmType zero_cost = config_.firm_types[rival];
  zero_cost.cost = 0.0;
  std::vector<double> base(num_actions_);
  for (int b = 0; b < num_actions_; ++b) {
    const policy::ProfitMoments m = Moments(node, b, action, zero_cost);
    base[b] = policy::CredibleRiskScore(m.mean, m.sd, config_.kappa[rival]);
  }
  const double t = config_.likelihood_temperature;
  std::array<double, 2> log_lik{};
  for (int k = 0; k < 2; ++k) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> scores(num_actions_);
    for (int b = 0; b < num_actions_; ++b) {
      scores[b] = base[b] - config_.cost_levels[k] * ActionAt(b).quantity;
      best = std::max(best, scores[b]);
    }
    double total = 0.0;
    for (double s : scores) total += std::exp((s - best) / t);
    log_lik[k] = (scores[rival_action] - best) / t - std::log(total);
  }
  return log_lik[1] - log_lik[0];
}

double MarketGameModel::UpdatedHighCost(double prior, double log_ratio) {
  if (prior <= 0.0) return 0.0;
  if (prior >= 1.0) return 1.0;
  const double logit = std::log(prior) - std::log1p(-prior) + log_ratio;
  return 1.0 / (1.0 + std::exp(-logit));
}

void MarketGameModel::Transitions(int firm, int node, int action,
                                  int rival_action,
                                  std::vector<Transition>& out) const {
  out.clear();
  const Predictive pred = PredictiveAt(node, action, rival_action);
  const BeliefNode& here = grid_.node(node);
  const market::Action own = ActionAt(action);
  const double stock = here.inventory + own.quantity;
  const double next_belief = UpdatedHighCost(
      here.high_cost_prob, LogLikelihoodRatio(firm, node, action, rival_action));

  learning::PosteriorHyper hyper = config_.representative;
  hyper.m(0) = here.intercept;
  for (std::size_t k = 0; k < quadrature_.nodes.size(); ++k) {
    const double demand = pred.mean + pred.sd * quadrature_.nodes[k];
    const double sales = std::min(std::max(demand, 0.0), stock);
    const learning::PosteriorHyper updated =
        learning::ConjugateUpdate(hyper, pred.x, demand);
    grid_.Project({stock - sales, updated.m(0), next_belief},
                  quadrature_.weights[k], config_.projection, out);
  }
  Consolidate(out);
}

GridPolicy MarketGameModel::MyopicPolicy(int firm,
                                         const GridPolicy& rival_policy) const {
  GridPolicy out;
  out.actions.resize(grid_.size());
  for (int node = 0; node < grid_.size(); ++node) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_actions_; ++a) {
      const double r = Reward(firm, node, a, rival_policy.actions.at(node));
      if (r > best) {
        best = r;
        out.actions[node] = a;
      }
    }
  }
  return out;
}

int MarketGameModel::NearestNode(const BeliefNode& point) const {
  std::vector<Transition> out;
  grid_.Project(point, 1.0, Projection::kNearest, out);
  return out.front().node;
}

bool MarketGameModel::Refresh(const std::array<GridPolicy, 2>& policies) {
  if (config_.refresh_trajectories <= 0) return false;

  learning::PosteriorHyper sum = initial_representative_;
  sum.m.setZero();
  sum.S.setZero();
  sum.a = 0.0;
  sum.b = 0.0;
  int count = 0;

  for (int traj = 0; traj < config_.refresh_trajectories; ++traj) {
    StreamKey key;
    key.master_seed = config_.refresh_seed;
    key.replication = static_cast<std::uint32_t>(traj);
    key.purpose = StreamPurpose::kEquilibriumRefresh;
    RandomStream rng(key);
    RandomStream imputation = rng.Fork(1);

    learning::PosteriorHyper hyper = initial_representative_;
    std::array<double, 2> belief = {0.5, 0.5};
    market::MarketState state;
    for (int t = 1; t <= config_.refresh_horizon; ++t) {
      std::array<int, 2> nodes{};
      std::array<int, 2> actions{};
      std::array<market::Action, 2> played{};
      for (int f = 0; f < 2; ++f) {
        nodes[f] = NearestNode({state.inventory[f], hyper.m(0), belief[f]});
        actions[f] = policies[f].actions.at(nodes[f]);
        played[f] = ActionAt(actions[f]);
      }
      const market::PeriodResult period = market::SimulatePeriod(
          state, played, config_.truth, config_.firm_types, rng,
          t == config_.refresh_horizon, config_.salvage_mode);
      for (int f = 0; f < 2; ++f) {
        belief[f] = UpdatedHighCost(
            belief[f],
            LogLikelihoodRatio(f, nodes[f], actions[f], actions[1 - f]));
      }
      for (int f = 0; f < 2; ++f) {
        const market::PeriodOutcome& o = period.outcomes[f];
        learning::ObservationRecord record;
        record.covariate = market::CovariateVector(
            played[f].price, played[1 - f].price, state.last_stockout[1 - f]);
        record.stock = state.inventory[f] + played[f].quantity;
        record.censored = o.stockout;
        record.sales = o.stockout ? record.stock : o.latent_demand;
        hyper = learning::OnlineUpdate(hyper, record, imputation,
                                       config_.learning);
      }
      state = period.next_state;
      sum.m += hyper.m;
      sum.S += hyper.S;
      sum.a += hyper.a;
      sum.b += hyper.b;
      ++count;
    }
  }

  learning::PosteriorHyper refreshed = config_.representative;
  refreshed.m.tail<3>() = sum.m.tail<3>() / count;
  refreshed.S = sum.S / count;
  refreshed.a = sum.a / count;
  refreshed.b = sum.b / count;
  const bool changed =
      !(refreshed.m - config_.representative.m).isZero(1e-12) ||
      !(refreshed.S - config_.representative.S).isZero(1e-12) ||
      std::abs(refreshed.a - config_.representative.a) > 1e-12 ||
      std::abs(refreshed.b - config_.representative.b) > 1e-12;
  config_.representative = refreshed;
  return changed;
}

}  // namespace crgame::equilibrium
