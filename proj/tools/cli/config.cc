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

#include "config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace crgame::cli {
namespace {

using nlohmann::json;

// Walks one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown fields.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(Where("") + ": expected an object");
  }

  bool Has(const std::string& key) const { return obj_.contains(key); }

  template <typename T>
  void Get(const std::string& key, T& out) {
    if (!obj_.contains(key)) return;
    seen_.insert(key);
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(Where(key) + ": wrong type (got " +
                        obj_.at(key).dump() + ")");
    }
  }

  Reader Child(const std::string& key) {
    seen_.insert(key);
    return Reader(obj_.at(key), Where(key));
  }

  std::string Where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  // Throws on any key that was never read.
  void Finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError(Where(key) + ": unknown field");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Enum>
struct EnumName {
  Enum value;
  const char* name;
};

constexpr EnumName<market::SalvageMode> kSalvageNames[] = {
    {market::SalvageMode::kPerPeriod, "per-period"},
    {market::SalvageMode::kTerminal, "terminal"}};
constexpr EnumName<policy::ForecastRule> kForecastNames[] = {
    {policy::ForecastRule::kRepeatLast, "repeat-last"},
    {policy::ForecastRule::kTypeWeightedBestResponse,
     "type-weighted-best-response"}};
constexpr EnumName<learning::VarianceMode> kVarianceNames[] = {
    {learning::VarianceMode::kLearned, "learned"},
    {learning::VarianceMode::kKnown, "known"}};
constexpr EnumName<learning::ImputationMode> kImputationNames[] = {
    {learning::ImputationMode::kSingleImputation, "single-imputation"},
    {learning::ImputationMode::kGibbsEveryPeriod, "gibbs-every-period"}};
constexpr EnumName<sim::PolicyAssignment> kAssignmentNames[] = {
    {sim::PolicyAssignment::kBothSame, "both-same"},
    {sim::PolicyAssignment::kMixedPairing, "mixed-pairing"}};
constexpr EnumName<equilibrium::Projection> kProjectionNames[] = {
    {equilibrium::Projection::kNearest, "nearest"},
    {equilibrium::Projection::kLinear, "linear"}};
constexpr EnumName<equilibrium::UpdateScheme> kSchemeNames[] = {
    {equilibrium::UpdateScheme::kAlternating, "alternating"},
    {equilibrium::UpdateScheme::kSimultaneous, "simultaneous"}};

template <typename Enum, std::size_t N>
Enum ParseEnum(const EnumName<Enum> (&names)[N], const std::string& text,
               const std::string& where) {
  std::string allowed;
  for (const auto& n : names) {
    if (text == n.name) return n.value;
    allowed += allowed.empty() ? n.name : std::string(", ") + n.name;
  }
  throw ConfigError(where + ": unknown value \"" + text + "\" (expected one of " +
                    allowed + ")");
}

template <typename Enum, std::size_t N>
std::string EnumText(const EnumName<Enum> (&names)[N], Enum value) {
  for (const auto& n : names) {
    if (n.value == value) return n.name;
  }
  return "?";
}

template <typename Enum, std::size_t N>
void GetEnum(Reader& r, const std::string& key,
             const EnumName<Enum> (&names)[N], Enum& out) {
  std::string text;
  if (!r.Has(key)) return;
  r.Get(key, text);
  out = ParseEnum(names, text, r.Where(key));
}

policy::PolicyKind ParsePolicyAt(const std::string& text,
                                 const std::string& where) {
  try {
    return policy::ParsePolicy(text);
  } catch (const InvalidArgument&) {
    throw ConfigError(where + ": unknown policy \"" + text + "\"");
  }
}

void ReadAxis(Reader& parent, const std::string& key,
              equilibrium::GridAxis& axis) {
  if (!parent.Has(key)) return;
  Reader r = parent.Child(key);
  r.Get("lo", axis.lo);
  r.Get("hi", axis.hi);
  r.Get("count", axis.count);
  r.Finish();
}

json AxisJson(const equilibrium::GridAxis& axis) {
  return {{"lo", axis.lo}, {"hi", axis.hi}, {"count", axis.count}};
}

void ReadPolicy(Reader& r, policy::PolicyConfig& p) {
  r.Get("kappa", p.kappa);
  r.Get("predictive_samples", p.predictive_samples);
  r.Get("price_grid", p.price_grid);
  r.Get("quantity_grid", p.quantity_grid);
  GetEnum(r, "salvage_mode", kSalvageNames, p.salvage_mode);
  GetEnum(r, "forecast_rule", kForecastNames, p.forecast_rule);
  r.Get("likelihood_temperature", p.likelihood_temperature);
  if (r.Has("learning")) {
    Reader l = r.Child("learning");
    GetEnum(l, "variance_mode", kVarianceNames, p.learning.variance_mode);
    l.Get("known_sigma", p.learning.known_sigma);
    GetEnum(l, "imputation", kImputationNames, p.learning.imputation);
    l.Get("gibbs_burn_in", p.learning.gibbs_burn_in);
    l.Get("gibbs_retained", p.learning.gibbs_retained);
    l.Finish();
  }
  r.Finish();
}

void ReadEquilibrium(Reader& r, EquilibriumSpec& e) {
  if (r.Has("grid")) {
    Reader g = r.Child("grid");
    ReadAxis(g, "inventory", e.grid.inventory);
    ReadAxis(g, "intercept", e.grid.intercept);
    ReadAxis(g, "high_cost_prob", e.grid.high_cost_prob);
    g.Get("max_nodes", e.grid.max_nodes);
    g.Finish();
  }
  if (r.Has("discount")) {
    double d = 0.0;
    r.Get("discount", d);
    e.discount = d;
  }
  r.Get("kappa", e.kappa);
  r.Get("quadrature_order", e.quadrature_order);
  GetEnum(r, "projection", kProjectionNames, e.projection);
  r.Get("max_sweeps", e.max_sweeps);
  GetEnum(r, "scheme", kSchemeNames, e.scheme);
  r.Get("tolerance", e.tolerance);
  r.Get("max_iterations", e.max_iterations);
  r.Get("refresh_trajectories", e.refresh_trajectories);
  r.Get("refresh_horizon", e.refresh_horizon);
  r.Get("contraction_trials", e.contraction_trials);
  r.Finish();
}

void ValidateEquilibrium(const RunConfig& config) {
  const EquilibriumSpec& e = config.equilibrium;
  auto fail = [](const std::string& field, const std::string& rule) {
    throw ConfigError("equilibrium." + field + ": " + rule);
  };
  if (e.max_sweeps < 1) fail("max_sweeps", "must be >= 1");
  if (!(e.tolerance > 0.0)) fail("tolerance", "must be > 0");
  if (e.max_iterations < 1) fail("max_iterations", "must be >= 1");
  if (e.contraction_trials < 0) fail("contraction_trials", "must be >= 0");
  if (e.refresh_trajectories < 0) fail("refresh_trajectories", "must be >= 0");
  if (e.refresh_horizon < 1) fail("refresh_horizon", "must be >= 1");
  try {
    config.MarketGame().Validate();
    equilibrium::BuildBeliefGrid(e.grid);
  } catch (const InvalidArgument& err) {
    throw ConfigError(err.what());
  }
}

}  // namespace

void RunConfig::SyncPrior() {
  market::Covariate mean, sd;
  for (int k = 0; k < 4; ++k) {
    mean(k) = prior.mean[k];
    sd(k) = prior.sd[k];
  }
  sim.prior = learning::MakePrior(mean, sd, prior.a0, prior.b0);
  sim.policy.static_prior = sim.prior;
}

equilibrium::MarketGameConfig RunConfig::MarketGame() const {
  equilibrium::MarketGameConfig g;
  g.grid = equilibrium.grid;
  g.price_grid = sim.policy.price_grid;
  g.quantity_grid = sim.policy.quantity_grid;
  g.discount = equilibrium.discount.value_or(sim.delta);
  g.kappa = equilibrium.kappa;
  g.firm_types = {market::FirmType{sim.cost_levels[0], sim.holding, sim.salvage},
                  market::FirmType{sim.cost_levels[1], sim.holding, sim.salvage}};
  g.cost_levels = sim.cost_levels;
  g.representative = sim.prior;
  g.learning = sim.policy.learning;
  g.quadrature_order = equilibrium.quadrature_order;
  g.projection = equilibrium.projection;
  g.likelihood_temperature = sim.policy.likelihood_temperature;
  g.salvage_mode = sim.policy.salvage_mode;
  g.refresh_trajectories = equilibrium.refresh_trajectories;
  g.refresh_horizon = equilibrium.refresh_horizon;
  g.refresh_seed = sim.master_seed;
  g.truth = sim.truth;
  return g;
}

equilibrium::EquilibriumOptions RunConfig::EquilibriumOptionsFor() const {
  equilibrium::EquilibriumOptions o;
  o.max_sweeps = equilibrium.max_sweeps;
  o.scheme = equilibrium.scheme;
  o.value_iteration.tolerance = equilibrium.tolerance;
  o.value_iteration.max_iterations = equilibrium.max_iterations;
  return o;
}

RunConfig ParseConfig(const json& doc) {
  RunConfig c;
  Reader r(doc, "");
  sim::SimConfig& s = c.sim;
  r.Get("horizon", s.horizon);
  r.Get("replications", s.replications);
  r.Get("delta", s.delta);
  if (r.Has("truth")) {
    Reader t = r.Child("truth");
    t.Get("beta0", s.truth.beta0);
    t.Get("beta1", s.truth.beta1);
    t.Get("beta2", s.truth.beta2);
    t.Get("beta3", s.truth.beta3);
    t.Get("sigma", s.truth.sigma);
    t.Finish();
  }
  r.Get("cost_levels", s.cost_levels);
  r.Get("high_cost_prob", s.high_cost_prob);
  r.Get("holding", s.holding);
  r.Get("salvage", s.salvage);
  r.Get("initial_inventory", s.initial_inventory);
  if (r.Has("prior")) {
    Reader p = r.Child("prior");
    p.Get("mean", c.prior.mean);
    p.Get("sd", c.prior.sd);
    p.Get("a0", c.prior.a0);
    p.Get("b0", c.prior.b0);
    p.Finish();
  }
  if (r.Has("policy")) {
    Reader p = r.Child("policy");
    ReadPolicy(p, s.policy);
  }
  c.seed_from_file = r.Has("master_seed");
  r.Get("master_seed", s.master_seed);
  if (r.Has("policies")) {
    std::vector<std::string> names;
    r.Get("policies", names);
    s.policies.clear();
    for (const std::string& n : names) {
      s.policies.push_back(ParsePolicyAt(n, "policies"));
    }
  }
  GetEnum(r, "assignment", kAssignmentNames, s.assignment);
  if (r.Has("mixed_opponent")) {
    std::string name;
    r.Get("mixed_opponent", name);
    s.mixed_opponent = ParsePolicyAt(name, "mixed_opponent");
  }
  if (r.Has("bootstrap")) {
    Reader b = r.Child("bootstrap");
    b.Get("resamples", s.bootstrap_resamples);
    b.Get("level", s.bootstrap_level);
    b.Finish();
  }
  r.Get("threads", s.threads);
  if (r.Has("equilibrium")) {
    Reader e = r.Child("equilibrium");
    ReadEquilibrium(e, c.equilibrium);
  }
  r.Finish();
  for (double sd : c.prior.sd) {
    if (!(sd > 0.0)) throw ConfigError("prior.sd: entries must be > 0");
  }
  if (!(c.prior.a0 > 1.0)) throw ConfigError("prior.a0: must be > 1");
  if (!(c.prior.b0 > 0.0)) throw ConfigError("prior.b0: must be > 0");
  c.SyncPrior();
  return c;
}

RunConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ConfigError(path + ": invalid JSON: " + err.what());
  }
  return ParseConfig(doc);
}

void ApplyOverrides(RunConfig& config, const Overrides& o,
                    const char* env_seed) {
  sim::SimConfig& s = config.sim;
  if (o.seed) {
    s.master_seed = *o.seed;
  } else if (!config.seed_from_file && env_seed != nullptr && *env_seed != '\0') {
    const std::string text(env_seed);
    std::uint64_t seed = 0;
    const auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw ConfigError("CRGAME_SEED: not an unsigned 64-bit integer: " + text);
    }
    s.master_seed = seed;
  }
  if (o.replications) s.replications = *o.replications;
  if (o.horizon) s.horizon = *o.horizon;
  if (!o.policies.empty()) {
    s.policies.clear();
    for (const std::string& n : o.policies) {
      s.policies.push_back(ParsePolicyAt(n, "--policy"));
    }
  }
  if (o.kappa) s.policy.kappa = *o.kappa;
  if (o.salvage_mode) {
    s.policy.salvage_mode =
        ParseEnum(kSalvageNames, *o.salvage_mode, "--salvage-mode");
  }
  if (o.threads) s.threads = *o.threads;
  try {
    s.Validate();
  } catch (const Error& err) {
    throw ConfigError(err.what());
  }
  ValidateEquilibrium(config);
}

json ToJson(const RunConfig& c) {
  const sim::SimConfig& s = c.sim;
  const policy::PolicyConfig& p = s.policy;
  const EquilibriumSpec& e = c.equilibrium;
  json policies = json::array();
  for (policy::PolicyKind k : s.policies) {
    policies.push_back(std::string(policy::PolicySlug(k)));
  }
  json eq = {
      {"grid",
       {{"inventory", AxisJson(e.grid.inventory)},
        {"intercept", AxisJson(e.grid.intercept)},
        {"high_cost_prob", AxisJson(e.grid.high_cost_prob)},
        {"max_nodes", e.grid.max_nodes}}},
      {"discount", e.discount.value_or(s.delta)},
      {"kappa", e.kappa},
      {"quadrature_order", e.quadrature_order},
      {"projection", EnumText(kProjectionNames, e.projection)},
      {"max_sweeps", e.max_sweeps},
      {"scheme", EnumText(kSchemeNames, e.scheme)},
      {"tolerance", e.tolerance},
      {"max_iterations", e.max_iterations},
      {"refresh_trajectories", e.refresh_trajectories},
      {"refresh_horizon", e.refresh_horizon},
      {"contraction_trials", e.contraction_trials}};
  return {
      {"horizon", s.horizon},
      {"replications", s.replications},
      {"delta", s.delta},
      {"truth",
       {{"beta0", s.truth.beta0},
        {"beta1", s.truth.beta1},
        {"beta2", s.truth.beta2},
        {"beta3", s.truth.beta3},
        {"sigma", s.truth.sigma}}},
      {"cost_levels", s.cost_levels},
      {"high_cost_prob", s.high_cost_prob},
      {"holding", s.holding},
      {"salvage", s.salvage},
      {"initial_inventory", s.initial_inventory},
      {"prior",
       {{"mean", c.prior.mean},
        {"sd", c.prior.sd},
        {"a0", c.prior.a0},
        {"b0", c.prior.b0}}},
      {"policy",
       {{"kappa", p.kappa},
        {"predictive_samples", p.predictive_samples},
        {"price_grid", p.price_grid},
        {"quantity_grid", p.quantity_grid},
        {"salvage_mode", EnumText(kSalvageNames, p.salvage_mode)},
        {"forecast_rule", EnumText(kForecastNames, p.forecast_rule)},
        {"likelihood_temperature", p.likelihood_temperature},
        {"learning",
         {{"variance_mode",
           EnumText(kVarianceNames, p.learning.variance_mode)},
          {"known_sigma", p.learning.known_sigma},
          {"imputation", EnumText(kImputationNames, p.learning.imputation)},
          {"gibbs_burn_in", p.learning.gibbs_burn_in},
          {"gibbs_retained", p.learning.gibbs_retained}}}}},
      {"master_seed", s.master_seed},
      {"policies", policies},
      {"assignment", EnumText(kAssignmentNames, s.assignment)},
      {"mixed_opponent", std::string(policy::PolicySlug(s.mixed_opponent))},
      {"bootstrap",
       {{"resamples", s.bootstrap_resamples}, {"level", s.bootstrap_level}}},
      {"threads", s.threads},
      {"equilibrium", eq}};
}

std::string ConfigHash(const RunConfig& config) {
  json doc = ToJson(config);
  doc.erase("threads");
  const std::string text = doc.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace crgame::cli
