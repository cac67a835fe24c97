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

// JSON run configuration: loading, validation, flag overrides and hashing.

#ifndef CRGAME_TOOLS_CLI_CONFIG_H_
#define CRGAME_TOOLS_CLI_CONFIG_H_

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crgame/equilibrium.h"
#include "crgame/market_game.h"
#include "crgame/simharness.h"
#include "json.hpp"

namespace crgame::cli {

// Invalid or unreadable configuration; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Output could not be written; maps to exit status 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PriorSpec {
  std::array<double, 4> mean = {35.0, -2.0, 0.5, 3.0};
  std::array<double, 4> sd = {10.0, 2.0, 2.0, 4.0};
  double a0 = 3.0;
  double b0 = 40.5;
};

struct EquilibriumSpec {
  equilibrium::BeliefGridConfig grid;
  // Defaults to the simulation discount when absent from the file.
  std::optional<double> discount;
  std::array<double, 2> kappa = {0.6, 0.6};
  int quadrature_order = 9;
  equilibrium::Projection projection = equilibrium::Projection::kNearest;
  int max_sweeps = 50;
  equilibrium::UpdateScheme scheme = equilibrium::UpdateScheme::kAlternating;
  double tolerance = 1e-6;
  int max_iterations = 100000;
  int refresh_trajectories = 0;
  int refresh_horizon = 30;
  int contraction_trials = 100;
};

struct RunConfig {
  sim::SimConfig sim;
  PriorSpec prior;
  EquilibriumSpec equilibrium;
  bool seed_from_file = false;

  // Rebuilds sim.prior and sim.policy.static_prior from `prior`.
  void SyncPrior();
  equilibrium::MarketGameConfig MarketGame() const;
  equilibrium::EquilibriumOptions EquilibriumOptionsFor() const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<int> horizon;
  std::vector<std::string> policies;
  std::optional<double> kappa;
  std::optional<std::string> salvage_mode;
  std::optional<int> threads;
};

// Parses a config document. Missing fields keep their defaults; unknown
// fields and ill-typed values raise ConfigError naming the field path.
RunConfig ParseConfig(const nlohmann::json& doc);
RunConfig LoadConfig(const std::string& path);

// Applies flag overrides, then CRGAME_SEED when neither a flag nor the file
// set the seed, then validates.
void ApplyOverrides(RunConfig& config, const Overrides& overrides,
                    const char* env_seed);

// Canonical JSON of every field (object keys sorted).
nlohmann::json ToJson(const RunConfig& config);

// FNV-1a 64 of the canonical JSON with the thread count removed, as 16 hex
// digits.
std::string ConfigHash(const RunConfig& config);

}  // namespace crgame::cli

#endif  // CRGAME_TOOLS_CLI_CONFIG_H_
