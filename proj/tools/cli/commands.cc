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

#include "commands.h"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <system_error>

#include "crgame/market_game.h"
#include "crgame/policy.h"

namespace crgame::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Collects output files in memory, then writes them through a staging
// directory so that a failed run leaves no partial tree behind.
class OutputTree {
 public:
  void Add(const std::string& relative, std::string contents) {
    files_[relative] = std::move(contents);
  }
  std::vector<std::string> Paths() const {
    std::vector<std::string> out;
    for (const auto& [path, contents] : files_) out.push_back(path);
    return out;
  }

  void Commit(const std::string& out_dir) const {
    const fs::path root(out_dir);
    const fs::path staging = root / ".crgame-staging";
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());
    fs::remove_all(staging, ec);
    try {
      for (const auto& [relative, contents] : files_) {
        const fs::path target = staging / relative;
        fs::create_directories(target.parent_path());
        std::ofstream out(target, std::ios::binary);
        out << contents;
        out.close();
        if (!out) throw IoError("cannot write " + target.string());
      }
      for (const auto& [relative, contents] : files_) {
        const fs::path target = root / relative;
        fs::create_directories(target.parent_path());
        fs::rename(staging / relative, target);
      }
      fs::remove_all(staging);
    } catch (const fs::filesystem_error& err) {
      fs::remove_all(staging, ec);
      throw IoError(err.what());
    } catch (...) {
      fs::remove_all(staging, ec);
      throw;
    }
  }

 private:
  std::map<std::string, std::string> files_;
};

class Csv {
 public:
  explicit Csv(const std::string& header) { text_ = header + "\n"; }
  template <typename... Fields>
  void Row(const Fields&... fields) {
    std::string line;
    (Append(line, fields), ...);
    line.back() = '\n';
    text_ += line;
  }
  const std::string& text() const { return text_; }

 private:
  static void Append(std::string& line, double v) {
    line += FormatDouble(v) + ",";
  }
  static void Append(std::string& line, int v) {
    line += std::to_string(v) + ",";
  }
  static void Append(std::string& line, std::string_view v) {
    line += std::string(v) + ",";
  }
  static void Append(std::string& line, const std::string& v) {
    line += v + ",";
  }
  static void Append(std::string& line, const char* v) {
    line += std::string(v) + ",";
  }
  std::string text_;
};

std::string Dump(const json& doc) { return doc.dump(2) + "\n"; }

std::string Timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    long long value = 0;
    const std::string text(epoch);
    const auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc() && ptr == text.data() + text.size()) {
      t = static_cast<std::time_t>(value);
    }
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json Manifest(const RunConfig& config, const std::string& command,
              std::vector<std::string> outputs) {
  outputs.push_back("manifest.json");
  return {{"command", command},
          {"config_hash", ConfigHash(config)},
          {"master_seed", config.sim.master_seed},
          {"artifact_version", kArtifactVersion},
          {"timestamp", Timestamp()},
          {"outputs", outputs},
          {"config", [&] {
             json doc = ToJson(config);
             doc.erase("threads");
             return doc;
           }()}};
}

std::string Name(policy::PolicyKind kind) {
  return std::string(policy::PolicyName(kind));
}

json OptionalNumber(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

void AddCurve(OutputTree& tree, const std::string& file,
              const sim::ExperimentSummary& summary,
              std::vector<double> sim::Curves::*member) {
  Csv csv("period,policy,value");
  for (const sim::PolicySummary& p : summary.policies) {
    const std::vector<double>& series = p.curves.*member;
    for (std::size_t t = 0; t < series.size(); ++t) {
      csv.Row(static_cast<int>(t + 1), Name(p.policy), series[t]);
    }
  }
  tree.Add("curves/" + file, csv.text());
}

std::string ObjectiveSurface(const RunConfig& config) {
  const policy::PolicyConfig pc = config.sim.EffectivePolicyConfig();
  StreamKey key;
  key.master_seed = config.sim.master_seed;
  key.period = 1;
  key.purpose = StreamPurpose::kGeneric;
  RandomStream rng(key);
  policy::PredictiveDrawSet draws(config.sim.prior, pc.learning,
                                  pc.predictive_samples, rng);
  const double mid_price = pc.price_grid[(pc.price_grid.size() - 1) / 2];
  draws.Condition(mid_price, false);
  const market::FirmType type{config.sim.cost_levels[0], config.sim.holding,
                              config.sim.salvage};
  const std::vector<policy::ActionScore> scores = draws.ScoreGrid(
      config.sim.initial_inventory, type, config.sim.horizon == 1, pc.kappa, pc);
  Csv csv("price,quantity,mean,sd,score");
  for (const policy::ActionScore& s : scores) {
    csv.Row(s.action.price, s.action.quantity, s.mean, s.sd, s.score);
  }
  return csv.text();
}

std::string Fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s == "-0.00" || s == "-0.0000") s.erase(0, 1);
  return s;
}

std::string FixedOrUndefined(const json& v, int decimals) {
  return v.is_number() ? Fixed(v.get<double>(), decimals) : "undefined";
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing input " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json ReadJson(const fs::path& path) {
  try {
    return json::parse(ReadFile(path));
  } catch (const json::parse_error& err) {
    throw IoError("cannot parse " + path.string() + ": " + err.what());
  }
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

int CmdSimulate(const RunConfig& config, const std::string& out_dir,
                std::ostream& log) {
  const sim::SimConfig& sc = config.sim;
  const sim::ExperimentSummary summary = sim::RunExperiment(sc);
  OutputTree tree;

  Csv reps("policy,rep,firm1_cost,firm2_cost,firm1_profit,firm2_profit,"
           "market_profit,final_mse");
  Csv scatter("policy,rep,market_profit,final_mse");
  for (std::size_t i = 0; i < summary.policies.size(); ++i) {
    for (const sim::ReplicationRecord& r : summary.records[i]) {
      reps.Row(Name(r.policy), r.replication, r.types[0].cost,
               r.types[1].cost, r.discounted_profit[0], r.discounted_profit[1],
               r.market_profit, r.final_mse);
      scatter.Row(Name(r.policy), r.replication, r.market_profit,
                  r.final_mse);
    }
  }
  tree.Add("replications.csv", reps.text());
  tree.Add("plots/profit_mse_scatter.csv", scatter.text());
  tree.Add("plots/objective_surface.csv", ObjectiveSurface(config));

  json policies = json::array();
  for (const sim::PolicySummary& p : summary.policies) {
    policies.push_back({{"policy", Name(p.policy)},
                        {"slug", std::string(policy::PolicySlug(p.policy))},
                        {"replications", p.replications},
                        {"mean_market_profit", p.mean_market_profit},
                        {"sd_market_profit", p.sd_market_profit},
                        {"median_market_profit", p.median_market_profit},
                        {"mean_final_mse", p.mean_final_mse},
                        {"sd_final_mse", p.sd_final_mse},
                        {"mean_firm_profit", p.mean_firm_profit}});
  }
  json relative = json::array();
  if (summary.Find(policy::PolicyKind::kProposedCredibleRisk) != nullptr) {
    for (const sim::RelativeImprovement& r : sim::SummarizeRelative(summary)) {
      relative.push_back({{"baseline", Name(r.baseline)},
                          {"profit_gain_pct", OptionalNumber(r.profit_gain_pct)},
                          {"mse_reduction_pct",
                           OptionalNumber(r.mse_reduction_pct)}});
    }
  }
  tree.Add("summary.json",
           Dump({{"config_hash", ConfigHash(config)},
                 {"master_seed", sc.master_seed},
                 {"horizon", sc.horizon},
                 {"replications", sc.replications},
                 {"policies", policies},
                 {"relative", relative}}));

  json comparisons = json::array();
  for (const sim::BootstrapReport& b :
       sim::BootstrapAgainstBaselines(summary, sc)) {
    comparisons.push_back({{"policy", Name(b.policy)},
                           {"baseline", Name(b.baseline)},
                           {"mean_diff_profit", b.mean_diff_profit},
                           {"profit_ci", {b.profit_low, b.profit_high}},
                           {"mean_diff_mse", b.mean_diff_mse},
                           {"mse_ci", {b.mse_low, b.mse_high}}});
  }
  tree.Add("bootstrap.json", Dump({{"resamples", sc.bootstrap_resamples},
                                   {"level", sc.bootstrap_level},
                                   {"comparisons", comparisons}}));

  AddCurve(tree, "cumulative_profit.csv", summary,
           &sim::Curves::cumulative_profit);
  AddCurve(tree, "stockout_rate.csv", summary, &sim::Curves::stockout_rate);
  AddCurve(tree, "mean_price.csv", summary, &sim::Curves::mean_price);
  AddCurve(tree, "mean_quantity.csv", summary, &sim::Curves::mean_quantity);
  AddCurve(tree, "mse.csv", summary, &sim::Curves::mse);
  AddCurve(tree, "belief_high_cost.csv", summary,
           &sim::Curves::belief_high_cost);

  Csv dominance("period,baseline,value");
  if (const auto* proposed =
          summary.RecordsFor(policy::PolicyKind::kProposedCredibleRisk)) {
    for (policy::PolicyKind baseline :
         {policy::PolicyKind::kBayesianRiskNeutral,
          policy::PolicyKind::kClassicalStaticPrior}) {
      const auto* records = summary.RecordsFor(baseline);
      if (records == nullptr) continue;
      const std::vector<double> curve = sim::DominanceCurve(*proposed, *records);
      for (std::size_t t = 0; t < curve.size(); ++t) {
        dominance.Row(static_cast<int>(t + 1), Name(baseline), curve[t]);
      }
    }
  }
  tree.Add("curves/dominance.csv", dominance.text());

  tree.Add("manifest.json", Dump(Manifest(config, "simulate", tree.Paths())));
  tree.Commit(out_dir);
  log << "wrote " << tree.Paths().size() << " files to " << out_dir << "\n";
  return kExitOk;
}

int CmdEquilibrium(const RunConfig& config, const std::string& out_dir,
                   std::ostream& log) {
  equilibrium::MarketGameModel model(config.MarketGame());
  const equilibrium::EquilibriumOptions options = config.EquilibriumOptionsFor();
  OutputTree tree;

  equilibrium::EquilibriumResult result;
  std::string error;
  try {
    result = equilibrium::EquilibriumIteration(model, options);
  } catch (const equilibrium::ConvergenceError& err) {
    error = err.what();
    result.diagnostics = err.diagnostics();
    result.diagnostics.converged = false;
  }
  const bool have_policies = error.empty();
  const equilibrium::BeliefGrid& grid = model.grid();

  if (have_policies) {
    Csv policy_csv(
        "node,inventory,intercept,high_cost_prob,firm,action,price,quantity");
    Csv value_csv("node,firm,value");
    Csv myopic_csv("node,firm,action,price,quantity");
    for (int firm = 0; firm < 2; ++firm) {
      const equilibrium::GridPolicy myopic =
          model.MyopicPolicy(firm, result.policies[1 - firm]);
      for (int node = 0; node < grid.size(); ++node) {
        const equilibrium::BeliefNode& n = grid.node(node);
        const int a = result.policies[firm].actions[node];
        const market::Action act = model.ActionAt(a);
        policy_csv.Row(node, n.inventory, n.intercept, n.high_cost_prob,
                       firm + 1, a, act.price, act.quantity);
        value_csv.Row(node, firm + 1, result.values[firm].values[node]);
        const market::Action m = model.ActionAt(myopic.actions[node]);
        myopic_csv.Row(node, firm + 1, myopic.actions[node], m.price,
                       m.quantity);
      }
    }
    tree.Add("policy.csv", policy_csv.text());
    tree.Add("values.csv", value_csv.text());
    tree.Add("myopic_policy.csv", myopic_csv.text());

    json reports = json::array();
    for (int firm = 0; firm < 2; ++firm) {
      StreamKey key;
      key.master_seed = config.sim.master_seed;
      key.firm = static_cast<std::uint32_t>(firm);
      key.purpose = StreamPurpose::kContractionCheck;
      RandomStream rng(key);
      const equilibrium::BestResponseProblem problem(
          model, firm, result.policies[1 - firm]);
      const equilibrium::ContractionReport r = equilibrium::ContractionCheck(
          problem, config.equilibrium.contraction_trials, rng);
      reports.push_back({{"firm", firm + 1},
                         {"trials", r.trials},
                         {"discount", r.discount},
                         {"max_ratio", r.max_ratio},
                         {"constant_shift_error", r.constant_shift_error},
                         {"violations", r.violations.size()},
                         {"passed", r.passed}});
    }
    tree.Add("contraction.json", Dump({{"slack", equilibrium::kContractionSlack},
                                       {"firms", reports}}));
  }

  const learning::PosteriorHyper& rep = model.representative();
  json diagnostics = {
      {"converged", result.diagnostics.converged},
      {"sweeps", result.sweeps},
      {"nodes", grid.size()},
      {"actions", model.num_actions(0)},
      {"sup_norm_deltas", result.diagnostics.sup_norm_deltas},
      {"policy_change_counts", result.diagnostics.policy_change_counts},
      {"representative",
       {{"m", std::vector<double>(rep.m.data(), rep.m.data() + 4)},
        {"S", std::vector<double>(rep.S.data(), rep.S.data() + 16)},
        {"a", rep.a},
        {"b", rep.b}}}};
  if (!error.empty()) diagnostics["error"] = error;
  tree.Add("diagnostics.json", Dump(diagnostics));
  tree.Add("manifest.json", Dump(Manifest(config, "equilibrium", tree.Paths())));
  tree.Commit(out_dir);

  if (!result.diagnostics.converged) {
    log << "equilibrium iteration did not converge after " << result.sweeps
        << " sweeps" << (error.empty() ? "" : ": " + error) << "\n";
    return kExitNonConvergence;
  }
  log << "converged after " << result.sweeps << " sweeps; wrote "
      << tree.Paths().size() << " files to " << out_dir << "\n";
  return kExitOk;
}

std::string RenderReport(const json& summary, const json& bootstrap) {
  std::ostringstream md;
  md << "# Simulation report\n\n";
  md << "Config hash `" << summary.at("config_hash").get<std::string>()
     << "`, master seed " << summary.at("master_seed").get<std::uint64_t>()
     << ", " << summary.at("replications").get<int>()
     << " replications per policy, horizon "
     << summary.at("horizon").get<int>() << ".\n\n";

  md << "## Table 1. Main results\n\n";
  md << "| Method | Mean total profit | SD | Median | Mean final MSE | "
        "SD final MSE | Firm 1 mean profit | Firm 2 mean profit |\n";
  md << "|---|---:|---:|---:|---:|---:|---:|---:|\n";
  const json* proposed = nullptr;
  for (const json& p : summary.at("policies")) {
    const json& firms = p.at("mean_firm_profit");
    md << "| " << p.at("policy").get<std::string>() << " | "
       << Fixed(p.at("mean_market_profit"), 2) << " | "
       << Fixed(p.at("sd_market_profit"), 2) << " | "
       << Fixed(p.at("median_market_profit"), 2) << " | "
       << Fixed(p.at("mean_final_mse"), 4) << " | "
       << Fixed(p.at("sd_final_mse"), 4) << " | " << Fixed(firms.at(0), 2)
       << " | " << Fixed(firms.at(1), 2) << " |\n";
    if (p.at("policy") == "Proposed_Bayesian_CredibleRisk") proposed = &p;
  }

  md << "\n## Table 2. Relative improvement of the proposed method\n\n";
  if (proposed == nullptr) {
    md << "The proposed policy was not run.\n";
  } else {
    md << "| Baseline | Profit gain (%) | MSE reduction (%) |\n";
    md << "|---|---:|---:|\n";
    for (const json& p : summary.at("policies")) {
      if (&p == proposed) continue;
      const sim::RelativeImprovement r = sim::Relative(
          proposed->at("mean_market_profit"), p.at("mean_market_profit"),
          proposed->at("mean_final_mse"), p.at("mean_final_mse"));
      md << "| " << p.at("policy").get<std::string>() << " | "
         << FixedOrUndefined(OptionalNumber(r.profit_gain_pct), 4) << " | "
         << FixedOrUndefined(OptionalNumber(r.mse_reduction_pct), 4)
         << " |\n";
    }
  }

  md << "\n## Table 3. Bootstrap comparison\n\n";
  md << bootstrap.at("resamples").get<int>() << " resamples, "
     << Fixed(100.0 * bootstrap.at("level").get<double>(), 0)
     << "% percentile intervals.\n\n";
  if (bootstrap.at("comparisons").empty()) {
    md << "No comparisons available.\n";
  } else {
    md << "| Comparison | Mean profit diff | Profit CI | Mean MSE diff | "
          "MSE CI |\n";
    md << "|---|---:|---|---:|---|\n";
    for (const json& c : bootstrap.at("comparisons")) {
      const json& pci = c.at("profit_ci");
      const json& mci = c.at("mse_ci");
      md << "| " << c.at("policy").get<std::string>() << " - "
         << c.at("baseline").get<std::string>() << " | "
         << Fixed(c.at("mean_diff_profit"), 2) << " | [" << Fixed(pci.at(0), 2)
         << ", " << Fixed(pci.at(1), 2) << "] | "
         << Fixed(c.at("mean_diff_mse"), 4) << " | [" << Fixed(mci.at(0), 4)
         << ", " << Fixed(mci.at(1), 4) << "] |\n";
    }
  }
  return md.str();
}

int CmdReport(const std::string& results_dir, std::ostream& out,
              std::ostream& log) {
  const fs::path root(results_dir);
  std::string text;
  try {
    const json summary = ReadJson(root / "summary.json");
    const json bootstrap = ReadJson(root / "bootstrap.json");
    text = RenderReport(summary, bootstrap);
  } catch (const IoError& err) {
    log << "report: " << err.what()
        << "; run `crgame simulate --out " << results_dir << "` first\n";
    return kExitIo;
  } catch (const json::exception& err) {
    log << "report: malformed results in " << results_dir << ": " << err.what()
        << "\n";
    return kExitIo;
  }
  out << text;
  std::ofstream md(root / "report.md", std::ios::binary);
  md << text;
  md.close();
  if (!md) {
    log << "report: cannot write " << (root / "report.md").string() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace crgame::cli
