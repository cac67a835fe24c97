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

#include "crgame/market.h"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "crgame/numerics.h"

namespace crgame::market {

void FirmType::Validate() const {
  if (!(cost > 0.0)) throw InvalidArgument("firm type: cost must be > 0");
  if (!(holding >= 0.0)) throw InvalidArgument("firm type: holding must be >= 0");
  if (!(salvage >= 0.0 && salvage < cost)) {
    throw InvalidArgument("firm type: salvage must satisfy 0 <= s < cost");
  }
}

Covariate DemandParams::Coefficients() const {
  return Covariate(beta0, beta1, beta2, beta3);
}

void DemandParams::Validate() const {
  if (!(beta1 < 0.0)) throw InvalidArgument("demand: beta1 must be < 0");
  if (!(beta2 >= 0.0)) throw InvalidArgument("demand: beta2 must be >= 0");
  if (!(beta3 >= 0.0)) throw InvalidArgument("demand: beta3 must be >= 0");
  if (!(sigma > 0.0)) throw InvalidArgument("demand: sigma must be > 0");
}

double LatentDemand(const DemandParams& params, double own_price,
                    double rival_price, bool rival_stockout, double noise) {
  return params.beta0 + params.beta1 * own_price +
         params.beta2 * rival_price + (rival_stockout ? params.beta3 : 0.0) +
         noise;
}

CensoredSales CensorSales(double latent_demand, double stock) {
  return {std::min(std::max(latent_demand, 0.0), stock),
          latent_demand > stock};
}

double StepInventory(double stock, double sales) {
  if (sales < 0.0 || sales > stock) {
    throw std::logic_error("StepInventory: sales " + std::to_string(sales) +
                           " outside [0, " + std::to_string(stock) + "]");
  }
  return stock - sales;
}

double OnePeriodProfit(const Action& action, double sales,
                       double next_inventory, const FirmType& type,
                       bool terminal, SalvageMode salvage_mode) {
  const bool credit_salvage =
      salvage_mode == SalvageMode::kPerPeriod || terminal;
  return action.price * sales - type.cost * action.quantity -
         type.holding * next_inventory +
         (credit_salvage ? type.salvage * next_inventory : 0.0);
}

Covariate CovariateVector(double own_price, double rival_price,
                          bool rival_stockout) {
  return Covariate(1.0, own_price, rival_price, rival_stockout ? 1.0 : 0.0);
}

PeriodResult SimulatePeriodWithNoise(
    const MarketState& state, const std::array<Action, kNumFirms>& actions,
    const DemandParams& params, const std::array<FirmType, kNumFirms>& types,
    const std::array<double, kNumFirms>& noise, bool terminal,
    SalvageMode salvage_mode) {
  PeriodResult result;
  result.next_state.period = state.period + 1;
  for (int i = 0; i < kNumFirms; ++i) {
    const int j = 1 - i;
    PeriodOutcome& out = result.outcomes[i];
    const double stock = state.inventory[i] + actions[i].quantity;
    out.latent_demand = LatentDemand(params, actions[i].price,
                                     actions[j].price, state.last_stockout[j],
                                     noise[i]);
    const CensoredSales censored = CensorSales(out.latent_demand, stock);
    out.sales = censored.sales;
    out.stockout = censored.stockout;
    out.next_inventory = StepInventory(stock, out.sales);
    out.profit = OnePeriodProfit(actions[i], out.sales, out.next_inventory,
                                 types[i], terminal, salvage_mode);
    result.next_state.inventory[i] = out.next_inventory;
    result.next_state.last_prices[i] = actions[i].price;
    result.next_state.last_stockout[i] = out.stockout;
  }
  return result;
}

PeriodResult SimulatePeriod(const MarketState& state,
                            const std::array<Action, kNumFirms>& actions,
                            const DemandParams& params,
                            const std::array<FirmType, kNumFirms>& types,
                            RandomStream& rng, bool terminal,
                            SalvageMode salvage_mode) {
  std::array<double, kNumFirms> noise{};
  for (double& e : noise) e = params.sigma * rng.Normal();
  return SimulatePeriodWithNoise(state, actions, params, types, noise,
                                 terminal, salvage_mode);
}

}  // namespace crgame::market
