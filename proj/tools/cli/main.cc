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

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.h"

namespace {

using crgame::cli::ConfigError;
using crgame::cli::IoError;

void AddRunFlags(CLI::App* cmd, std::string& config_path, std::string& out,
                 crgame::cli::Overrides& o) {
  cmd->add_option("--config", config_path, "JSON configuration file");
  cmd->add_option("--out", out, "output directory")->required();
  cmd->add_option("--seed", o.seed, "master seed (falls back to CRGAME_SEED)");
  cmd->add_option("--replications", o.replications, "replications per policy");
  cmd->add_option("--horizon", o.horizon, "periods per replication");
  cmd->add_option("--policy", o.policies,
                  "policy to run; repeat to run several");
  cmd->add_option("--kappa", o.kappa, "credible-risk penalty");
  cmd->add_option("--salvage-mode", o.salvage_mode, "per-period or terminal");
  cmd->add_option("--threads", o.threads, "worker threads");
}

crgame::cli::RunConfig Resolve(const std::string& path,
                               const crgame::cli::Overrides& o) {
  crgame::cli::RunConfig config =
      path.empty() ? crgame::cli::ParseConfig(nlohmann::json::object())
                   : crgame::cli::LoadConfig(path);
  crgame::cli::ApplyOverrides(config, o, std::getenv("CRGAME_SEED"));
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian duopoly inventory-pricing simulator and solver"};
  app.require_subcommand(1);

  std::string sim_config, sim_out, eq_config, eq_out, results_dir;
  crgame::cli::Overrides sim_overrides, eq_overrides;
  CLI::App* simulate = app.add_subcommand("simulate", "run the experiment");
  AddRunFlags(simulate, sim_config, sim_out, sim_overrides);
  CLI::App* equilibrium =
      app.add_subcommand("equilibrium", "solve the belief-grid game");
  AddRunFlags(equilibrium, eq_config, eq_out, eq_overrides);
  CLI::App* report = app.add_subcommand("report", "render result tables");
  report->add_option("results_dir", results_dir, "simulate output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : crgame::cli::kExitConfig;
  }

  try {
    if (*simulate) {
      return crgame::cli::CmdSimulate(Resolve(sim_config, sim_overrides),
                                      sim_out, std::cerr);
    }
    if (*equilibrium) {
      return crgame::cli::CmdEquilibrium(Resolve(eq_config, eq_overrides),
                                         eq_out, std::cerr);
    }
    return crgame::cli::CmdReport(results_dir, std::cout, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return crgame::cli::kExitConfig;
  } catch (const crgame::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return crgame::cli::kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return crgame::cli::kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
