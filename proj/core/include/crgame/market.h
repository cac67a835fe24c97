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

// Ground-truth physics of the duopoly: linear demand with a lagged rival
// stockout spillover, censoring of sales by available stock, inventory
// carry-over and one-period profit accounting.

#ifndef CRGAME_MARKET_H_
#define CRGAME_MARKET_H_

#include <array>
#include <compare>

#include <Eigen/Core>

#include "crgame/rng.h"

namespace crgame::market {

inline constexpr int kNumFirms = 2;
inline constexpr int kNumCoefficients = 4;

using Covariate = Eigen::Matrix<double, kNumCoefficients, 1>;

// Private operational type of a firm: unit cost, holding cost per unit and
// period, salvage value per unit.
struct FirmType {
  double cost = 6.0;
  double holding = 0.8;
  double salvage = 1.5;

  // Throws InvalidArgument unless cost > 0, holding >= 0 and
  // 0 <= salvage < cost.
  void Validate() const;
  friend bool operator==(const FirmType&, const FirmType&) = default;
};

// Coefficients of the linear demand model, positional with Covariate:
// intercept, own-price slope (signed, negative), rival-price slope and the
// bump a firm receives after its rival stocked out. sigma is the noise sd.
struct DemandParams {
  double beta0 = 45.0;
  double beta1 = -3.6;
  double beta2 = 1.2;
  double beta3 = 7.5;
  double sigma = 4.5;

  Covariate Coefficients() const;
  void Validate() const;
};

struct Action {
  double quantity = 0.0;
  double price = 0.0;

  friend bool operator==(const Action&, const Action&) = default;
};

enum class SalvageMode {
  kPerPeriod,  // s * I' credited every period
  kTerminal,   // s * I' credited only in the final period
};

struct PeriodOutcome {
  double latent_demand = 0.0;
  double sales = 0.0;
  bool stockout = false;
  double profit = 0.0;
  double next_inventory = 0.0;
};

struct MarketState {
  int period = 1;
  std::array<double, kNumFirms> inventory{0.0, 0.0};
  std::array<double, kNumFirms> last_prices{0.0, 0.0};
  // Stockout indicators of the previous period; they enter demand with a
  // one-period lag and start false.
  std::array<bool, kNumFirms> last_stockout{false, false};
};

double LatentDemand(const DemandParams& params, double own_price,
                    double rival_price, bool rival_stockout, double noise);

struct CensoredSales {
  double sales = 0.0;
  bool stockout = false;
};

// sales = min(max(demand, 0), stock); stockout iff demand > stock.
CensoredSales CensorSales(double latent_demand, double stock);

// Returns stock - sales. Throws std::logic_error if sales is outside
// [0, stock].
double StepInventory(double stock, double sales);

double OnePeriodProfit(const Action& action, double sales,
                       double next_inventory, const FirmType& type,
                       bool terminal, SalvageMode salvage_mode);

Covariate CovariateVector(double own_price, double rival_price,
                          bool rival_stockout);

struct PeriodResult {
  std::array<PeriodOutcome, kNumFirms> outcomes;
  MarketState next_state;
};

// Draws one noise term per firm from `rng` (firm 0 first), evaluates demand
// against the lagged stockouts stored in `state` and advances the state.
// `terminal` selects the salvage credit under SalvageMode::kTerminal.
PeriodResult SimulatePeriod(const MarketState& state,
                            const std::array<Action, kNumFirms>& actions,
                            const DemandParams& params,
                            const std::array<FirmType, kNumFirms>& types,
                            RandomStream& rng, bool terminal = false,
                            SalvageMode salvage_mode = SalvageMode::kPerPeriod);

// Same as SimulatePeriod with caller-supplied noise (in demand units).
PeriodResult SimulatePeriodWithNoise(
    const MarketState& state, const std::array<Action, kNumFirms>& actions,
    const DemandParams& params, const std::array<FirmType, kNumFirms>& types,
    const std::array<double, kNumFirms>& noise, bool terminal,
    SalvageMode salvage_mode);

}  // namespace crgame::market

#endif  // CRGAME_MARKET_H_
