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

#include "crgame/policy.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "crgame/numerics.h"

namespace crgame::policy {
namespace {

bool StrictlyIncreasing(const std::vector<double>& grid) {
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) return false;
  }
  return true;
}

double SalvageCredit(const FirmType& type, bool terminal,
                     market::SalvageMode mode) {
  return (mode == market::SalvageMode::kPerPeriod || terminal) ? type.salvage
                                                               : 0.0;
}

Action GridMidpoint(const PolicyConfig& config) {
  return {config.quantity_grid[(config.quantity_grid.size() - 1) / 2],
          config.price_grid[(config.price_grid.size() - 1) / 2]};
}

// Closed-form expected profit when demand ~ N(mu, sd^2).
double ExpectedProfit(double mu, double sd, double inventory,
                      const Action& action, const FirmType& type,
                      double salvage_credit) {
  const double stock = inventory + action.quantity;
  const double sales = sd > 0.0
                           ? ExpectedSalesClosedFormFloored(mu, sd, stock)
                           : std::clamp(mu, 0.0, stock);
  return action.price * sales - type.cost * action.quantity -
         (type.holding - salvage_credit) * (stock - sales);
}

std::vector<ActionScore> ClosedFormGrid(const learning::PosteriorHyper& hyper,
                                        const learning::LearningOptions& opts,
                                        bool include_parameter_uncertainty,
                                        double inventory, const FirmType& type,
                                        const Action& rival, bool rival_stockout,
                                        bool terminal,
                                        const PolicyConfig& config) {
  const double noise_var = opts.NoiseVariance(hyper);
  const double credit = SalvageCredit(type, terminal, config.salvage_mode);
  std::vector<ActionScore> out;
  out.reserve(config.num_actions());
  for (double price : config.price_grid) {
    const market::Covariate x =
        market::CovariateVector(price, rival.price, rival_stockout);
    const double mu = x.dot(hyper.m);
    double var = noise_var;
    if (include_parameter_uncertainty) var *= 1.0 + x.dot(hyper.S * x);
    const double sd = std::sqrt(var);
    for (double quantity : config.quantity_grid) {
      ActionScore s;
      s.action = {quantity, price};
      s.mean = ExpectedProfit(mu, sd, inventory, s.action, type, credit);
      s.sd = 0.0;
      s.score = s.mean;
      out.push_back(s);
    }
  }
  return out;
}

// Log-probability of `observed` under a softmax over scores / temperature.
double SoftmaxLogLikelihood(const std::vector<ActionScore>& scores,
                            int observed, double temperature) {
  double best = -std::numeric_limits<double>::infinity();
  for (const ActionScore& s : scores) best = std::max(best, s.score);
  double total = 0.0;
  for (const ActionScore& s : scores) {
    total += std::exp((s.score - best) / temperature);
  }
  return (scores[observed].score - best) / temperature - std::log(total);
}

}  // namespace

std::string_view PolicyName(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kProposedCredibleRisk:
      return "Proposed_Bayesian_CredibleRisk";
    case PolicyKind::kBayesianRiskNeutral:
      return "Bayesian_RiskNeutral";
    case PolicyKind::kClassicalStaticPrior:
      return "Classical_StaticPrior";
  }
  return "unknown";
}

std::string_view PolicySlug(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kProposedCredibleRisk:
      return "proposed-credible-risk";
    case PolicyKind::kBayesianRiskNeutral:
      return "bayesian-risk-neutral";
    case PolicyKind::kClassicalStaticPrior:
      return "classical-static-prior";
  }
  return "unknown";
}

PolicyKind ParsePolicy(std::string_view text) {
  for (PolicyKind kind : kAllPolicies) {
    if (text == PolicyName(kind) || text == PolicySlug(kind)) return kind;
  }
  throw InvalidArgument("unknown policy '" + std::string(text) +
                        "' (expected proposed-credible-risk, "
                        "bayesian-risk-neutral or classical-static-prior)");
}

void PolicyConfig::Validate() const {
  if (!(kappa >= 0.0)) throw InvalidArgument("policy: kappa must be >= 0");
  if (predictive_samples < 2) {
    throw InvalidArgument("policy: predictive_samples must be >= 2");
  }
  if (price_grid.empty() || quantity_grid.empty()) {
    throw InvalidArgument("policy: action grids must be nonempty");
  }
  if (!StrictlyIncreasing(price_grid) || !StrictlyIncreasing(quantity_grid)) {
    throw InvalidArgument("policy: action grids must be strictly increasing");
  }
  if (!(price_grid.front() > 0.0)) {
    throw InvalidArgument("policy: prices must be positive");
  }
  if (!(quantity_grid.front() >= 0.0)) {
    throw InvalidArgument("policy: quantities must be >= 0");
  }
  if (!(likelihood_temperature > 0.0)) {
    throw InvalidArgument("policy: likelihood_temperature must be > 0");
  }
  if (rival_types.empty()) {
    throw InvalidArgument("policy: rival_types must be nonempty");
  }
}

int PolicyConfig::num_actions() const {
  return static_cast<int>(price_grid.size() * quantity_grid.size());
}

Action PolicyConfig::ActionAt(int index) const {
  const auto nq = static_cast<int>(quantity_grid.size());
  return {quantity_grid.at(index % nq), price_grid.at(index / nq)};
}

int PolicyConfig::IndexOf(const Action& action) const {
  const auto p = std::find(price_grid.begin(), price_grid.end(), action.price);
  const auto q =
      std::find(quantity_grid.begin(), quantity_grid.end(), action.quantity);
  if (p == price_grid.end() || q == quantity_grid.end()) {
    throw InvalidArgument("action is not on the configured grids");
  }
  return static_cast<int>((p - price_grid.begin()) * quantity_grid.size() +
                          (q - quantity_grid.begin()));
}

Action PolicyConfig::NearestAction(double quantity, double price) const {
  auto nearest = [](const std::vector<double>& grid, double v) {
    double best = grid.front();
    for (double g : grid) {
      if (std::abs(g - v) < std::abs(best - v)) best = g;
    }
    return best;
  };
  return {nearest(quantity_grid, quantity), nearest(price_grid, price)};
}

PredictiveDrawSet::PredictiveDrawSet(const learning::PosteriorHyper& posterior,
                                     const learning::LearningOptions& options,
                                     int samples, RandomStream& rng) {
  if (samples < 2) {
    throw InvalidArgument("predictive moments need at least 2 samples");
  }
  const learning::CoefficientSampler sampler(posterior, options);
  intercept_.resize(samples);
  own_slope_.resize(samples);
  rival_slope_.resize(samples);
  spill_.resize(samples);
  for (int k = 0; k < samples; ++k) {
    const learning::CoefficientDraw draw = sampler.Draw(rng);
    const double eps = std::sqrt(draw.variance) * rng.Normal();
    intercept_[k] = draw.beta(0) + eps;
    own_slope_[k] = draw.beta(1);
    rival_slope_[k] = draw.beta(2);
    spill_[k] = draw.beta(3);
  }
  base_.resize(samples);
  scratch_.resize(samples);
}

void PredictiveDrawSet::Condition(double rival_price, bool rival_stockout) {
  const double z = rival_stockout ? 1.0 : 0.0;
  for (std::size_t k = 0; k < base_.size(); ++k) {
    base_[k] = intercept_[k] + rival_slope_[k] * rival_price + spill_[k] * z;
  }
  conditioned_ = true;
}

ProfitMoments PredictiveDrawSet::Moments(double inventory,
                                         const Action& candidate,
                                         const FirmType& type, bool terminal,
                                         market::SalvageMode mode) const {
  if (!conditioned_) throw std::logic_error("PredictiveDrawSet not conditioned");
  const double stock = inventory + candidate.quantity;
  const double carry = type.holding - SalvageCredit(type, terminal, mode);
  const double fixed = -type.cost * candidate.quantity - carry * stock;
  const double margin = candidate.price + carry;
  const std::size_t n = base_.size();
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double demand = base_[k] + own_slope_[k] * candidate.price;
    const double sales = std::min(std::max(demand, 0.0), stock);
    scratch_[k] = fixed + margin * sales;
    sum += scratch_[k];
  }
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = scratch_[k] - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / static_cast<double>(n - 1))};
}

std::vector<ActionScore> PredictiveDrawSet::ScoreGrid(
    double inventory, const FirmType& type, bool terminal, double kappa,
    const PolicyConfig& config) const {
  std::vector<ActionScore> out;
  out.reserve(config.num_actions());
  for (double price : config.price_grid) {
    for (double quantity : config.quantity_grid) {
      ActionScore s;
      s.action = {quantity, price};
      const ProfitMoments m =
          Moments(inventory, s.action, type, terminal, config.salvage_mode);
      s.mean = m.mean;
      s.sd = m.sd;
      s.score = CredibleRiskScore(m.mean, m.sd, kappa);
      out.push_back(s);
    }
  }
  return out;
}

ProfitMoments PredictiveProfitMoments(const BeliefState& state,
                                      const Action& candidate,
                                      const Action& rival_forecast,
                                      const PolicyConfig& config,
                                      RandomStream& rng) {
  config.IndexOf(candidate);
  config.IndexOf(rival_forecast);
  PredictiveDrawSet draws(state.demand_posterior, config.learning,
                          config.predictive_samples, rng);
  draws.Condition(rival_forecast.price, state.last_rival_stockout);
  return draws.Moments(state.inventory, candidate, state.own_type,
                       state.terminal_period, config.salvage_mode);
}

double ExpectedSalesClosedForm(double mu, double sd, double stock) {
  if (!(sd > 0.0)) throw InvalidArgument("expected sales: sd must be > 0");
  if (stock == std::numeric_limits<double>::infinity()) return mu;
  if (stock == -std::numeric_limits<double>::infinity()) return stock;
  const double z = (stock - mu) / sd;
  return stock - ((stock - mu) * NormalCdf(z) + sd * NormalPdf(z));
}

double ExpectedSalesClosedFormFloored(double mu, double sd, double stock) {
  return ExpectedSalesClosedForm(mu, sd, stock) -
         ExpectedSalesClosedForm(mu, sd, 0.0);
}

double CredibleRiskScore(double mean, double sd, double kappa) {
  return mean - kappa * sd;
}

Action ForecastRivalAction(const BeliefState& state,
                           const PolicyConfig& config) {
  if (config.forecast_rule == ForecastRule::kRepeatLast ||
      !state.last_rival_action.has_value()) {
    return state.last_rival_action.value_or(GridMidpoint(config));
  }
  // Belief-weighted expected-profit best response of the rival to this
  // firm's last action.
  const Action own = state.last_own_action.value_or(GridMidpoint(config));
  double quantity = 0.0;
  double price = 0.0;
  for (std::size_t k = 0; k < config.rival_types.size(); ++k) {
    const std::vector<ActionScore> grid = ClosedFormGrid(
        state.demand_posterior, config.learning, true, state.rival_inventory,
        config.rival_types[k], own, state.last_own_stockout,
        state.terminal_period, config);
    const Action br = grid[ArgmaxScore(grid)].action;
    quantity += state.rival_type_belief.probs.at(k) * br.quantity;
    price += state.rival_type_belief.probs.at(k) * br.price;
  }
  return config.NearestAction(quantity, price);
}

int ArgmaxScore(const std::vector<ActionScore>& scores) {
  if (scores.empty()) throw InvalidArgument("argmax over an empty grid");
  int best = 0;
  for (int k = 1; k < static_cast<int>(scores.size()); ++k) {
    if (scores[k].score > scores[best].score) best = k;
  }
  return best;
}

Selection SelectAction(const BeliefState& state, const PolicyConfig& config,
                       PolicyKind policy, RandomStream& rng) {
  if (config.price_grid.empty() || config.quantity_grid.empty()) {
    throw InvalidArgument("select action: empty action grid");
  }
  Selection out;
  if (policy == PolicyKind::kClassicalStaticPrior) {
    out.diagnostics = ClosedFormGrid(config.static_prior, config.learning,
                                     false, 0.0, state.own_type,
                                     GridMidpoint(config), false,
                                     state.terminal_period, config);
  } else {
    const double kappa =
        policy == PolicyKind::kProposedCredibleRisk ? config.kappa : 0.0;
    const Action forecast = ForecastRivalAction(state, config);
    PredictiveDrawSet draws(state.demand_posterior, config.learning,
                            config.predictive_samples, rng);
    draws.Condition(forecast.price, state.last_rival_stockout);
    out.diagnostics = draws.ScoreGrid(state.inventory, state.own_type,
                                      state.terminal_period, kappa, config);
  }
  out.action_index = ArgmaxScore(out.diagnostics);
  out.action = out.diagnostics[out.action_index].action;
  return out;
}

std::vector<double> RivalActionLikelihoods(const BeliefState& state,
                                           const Action& observed_rival_action,
                                           const PolicyConfig& config,
                                           PolicyKind rival_policy,
                                           RandomStream& rng) {
  const int observed = config.IndexOf(observed_rival_action);
  const Action own_as_seen =
      state.last_own_action.value_or(GridMidpoint(config));
  const std::size_t num_types = config.rival_types.size();
  std::vector<double> log_lik(num_types);

  if (rival_policy == PolicyKind::kClassicalStaticPrior) {
    for (std::size_t k = 0; k < num_types; ++k) {
      const std::vector<ActionScore> grid = ClosedFormGrid(
          config.static_prior, config.learning, false, 0.0,
          config.rival_types[k], GridMidpoint(config), false,
          state.terminal_period, config);
      log_lik[k] =
          SoftmaxLogLikelihood(grid, observed, config.likelihood_temperature);
    }
  } else {
    const double kappa = rival_policy == PolicyKind::kProposedCredibleRisk
                             ? config.kappa
                             : 0.0;
    PredictiveDrawSet draws(state.demand_posterior, config.learning,
                            config.predictive_samples, rng);
    draws.Condition(own_as_seen.price, state.last_own_stockout);
    for (std::size_t k = 0; k < num_types; ++k) {
      const std::vector<ActionScore> grid =
          draws.ScoreGrid(state.rival_inventory, config.rival_types[k],
                          state.terminal_period, kappa, config);
      log_lik[k] =
          SoftmaxLogLikelihood(grid, observed, config.likelihood_temperature);
    }
  }
  const double top = *std::max_element(log_lik.begin(), log_lik.end());
  std::vector<double> out(num_types);
  for (std::size_t k = 0; k < num_types; ++k) {
    out[k] = std::exp(log_lik[k] - top);
  }
  return out;
}

}  // namespace crgame::policy
