// Command line front end. Three subcommands:
//   fit       estimate one counterfactual on a panel CSV
//   simulate  Monte Carlo evaluation driven by a key=value config file
//   placebo   refit every donor as a pseudo-treated unit
//
// Exit codes: 0 success, 1 computation failure, 2 bad usage or bad input.
// All numeric output uses round-trippable formatting, so repeated runs (and
// runs with different SMC_THREADS settings) produce byte-identical files.

#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smc/baselines.hpp"
#include "smc/errors.hpp"
#include "smc/estimator.hpp"
#include "smc/experiments.hpp"
#include "smc/panel.hpp"

namespace {

using nlohmann::ordered_json;

struct FitArgs {
  std::string data;
  std::string treated;
  int t0 = 0;
  std::string method = "smc";
  std::string covariates;
  std::string v_weights;
  std::string variance = "appendix";
  std::string screen = "auto";
  std::string out;
};

struct SimArgs {
  std::string config;
  std::string out;
};

struct PlaceboArgs {
  std::string data;
  std::string treated;
  int t0 = 0;
  std::string methods = "smc,sc,dsc,ols";
  std::string covariates;
  std::string v_weights;
  std::string variance = "appendix";
  std::string screen = "auto";
  std::string out;
};

// Translates the user-facing flag values into estimator options. Throws
// SmcError on anything unrecognized, handled as a usage error by the caller.
smc::SmcOptions build_smc_options(const std::string& variance, const std::string& screen) {
  smc::SmcOptions opt;
  if (variance == "appendix") {
    opt.variance = smc::VarianceVariant::dof_adjusted;
  } else if (variance == "maintext") {
    opt.variance = smc::VarianceVariant::diag_residual;
  } else {
    smc::fail(smc::ErrorCode::InvalidConfig,
              "--variance-variant must be 'appendix' or 'maintext'");
  }
  if (screen == "auto") {
    opt.screen = smc::ScreenMode::automatic;
  } else if (screen == "off") {
    opt.screen = smc::ScreenMode::off;
  } else {
    int d = 0;
    auto [p, ec] = std::from_chars(screen.data(), screen.data() + screen.size(), d);
    if (ec != std::errc() || p != screen.data() + screen.size() || d < 1)
      smc::fail(smc::ErrorCode::InvalidConfig,
                "--screen must be 'auto', 'off' or a positive donor count");
    opt.screen = smc::ScreenMode::fixed;
    opt.screen_keep = d;
  }
  return opt;
}

// Loads the panel plus optional covariates, then rescales the pre-period rows
// when diagonal time weights were supplied. Everything downstream (fitting,
// reported paths, pre-period fit quality) lives on the rescaled scale.
smc::PanelData load_inputs(const std::string& data, const std::string& treated, int t0,
                           const std::string& covariates, const std::string& v_weights) {
  smc::PanelData panel = smc::load_panel_csv(data, treated, t0);
  if (!covariates.empty()) smc::load_covariates_csv(covariates, panel);
  if (!v_weights.empty()) {
    const Eigen::VectorXd v = smc::load_v_weights_csv(v_weights, t0);
    panel = smc::apply_diag_weights(panel, v);
  }
  return panel;
}

std::vector<std::string> split_methods(const std::string& list) {
  std::vector<std::string> methods;
  std::string cur;
  for (char ch : list) {
    if (ch == ',') {
      if (!cur.empty()) methods.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) methods.push_back(cur);
  return methods;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

ordered_json fit_to_json(const smc::PanelData& panel, const smc::EstimatorOutput& est,
                         const FitArgs& args) {
  const int T = static_cast<int>(est.counterfactual.size());
  const int post = T - panel.t0;

  ordered_json j;
  j["method"] = est.method;
  j["treated"] = panel.unit_labels[panel.treated];
  j["t0"] = panel.t0;
  j["weights"] = ordered_json::array();
  const auto donors = panel.donor_columns();
  for (std::size_t k = 0; k < donors.size(); ++k) {
    ordered_json entry;
    entry["unit"] = panel.unit_labels[donors[k]];
    entry["w"] = est.unit_weight[static_cast<int>(k)];
    entry["theta"] = est.unit_theta[static_cast<int>(k)];
    entry["comprehensive"] = est.comprehensive[static_cast<int>(k)];
    j["weights"].push_back(std::move(entry));
  }
  j["intercept"] = est.intercept;
  j["sigma2_hat"] = est.sigma2_hat ? ordered_json(*est.sigma2_hat) : ordered_json(nullptr);
  j["pre_rss"] = est.pre_rss;
  j["post_mspe"] =
      post > 0 ? ordered_json(est.att.tail(post).squaredNorm() / post) : ordered_json(nullptr);
  if (est.screened) {
    ordered_json kept = ordered_json::array();
    for (int pos : *est.screened) kept.push_back(panel.unit_labels[donors[pos]]);
    j["screened_units"] = std::move(kept);
  } else {
    j["screened_units"] = nullptr;
  }
  j["config"] = {{"data", args.data},
                 {"covariates", args.covariates},
                 {"v_weights", args.v_weights},
                 {"variance_variant", args.variance},
                 {"screen", args.screen}};
  return j;
}

void write_paths_csv(const smc::PanelData& panel, const smc::EstimatorOutput& est,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) smc::fail(smc::ErrorCode::MissingValue, "cannot open '" + path + "' for writing");
  out << "year,actual,counterfactual,att\n";
  const Eigen::VectorXd actual = panel.treated_path();
  for (int t = 0; t < actual.size(); ++t) {
    out << panel.time_labels[t] << ',' << smc::to_g17(actual[t]) << ','
        << smc::to_g17(est.counterfactual[t]) << ',' << smc::to_g17(est.att[t]) << '\n';
  }
  if (!out) smc::fail(smc::ErrorCode::MissingValue, "write failed for '" + path + "'");
}

int run_fit(const FitArgs& args) {
  smc::PanelData panel;
  smc::SmcOptions opt;
  try {
    opt = build_smc_options(args.variance, args.screen);
    panel = load_inputs(args.data, args.treated, args.t0, args.covariates, args.v_weights);
  } catch (const smc::SmcError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    const smc::EstimatorOutput est = smc::fit_method(args.method, panel, opt);
    print_warnings(est.warnings);
    const ordered_json j = fit_to_json(panel, est, args);
    if (args.out.empty()) {
      std::cout << j.dump(2) << '\n';
    } else {
      const std::string json_path = args.out + ".json";
      std::ofstream jf(json_path);
      if (!jf)
        smc::fail(smc::ErrorCode::MissingValue, "cannot open '" + json_path + "' for writing");
      jf << j.dump(2) << '\n';
      write_paths_csv(panel, est, args.out + "_paths.csv");
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_simulate(const SimArgs& args) {
  smc::SimConfig cfg;
  try {
    cfg = smc::parse_sim_config(args.config);
  } catch (const smc::SmcError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    const smc::MonteCarloTable table = smc::run_monte_carlo(cfg);
    if (args.out.empty()) {
      smc::write_monte_carlo_csv(table, std::cout);
    } else {
      smc::write_monte_carlo_csv(table, args.out + ".csv");
      smc::write_monte_carlo_json(table, args.out + ".json");
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_placebo(const PlaceboArgs& args) {
  smc::PanelData panel;
  smc::SmcOptions opt;
  std::vector<std::string> methods;
  try {
    opt = build_smc_options(args.variance, args.screen);
    methods = split_methods(args.methods);
    if (methods.empty())
      smc::fail(smc::ErrorCode::InvalidConfig, "--methods must name at least one method");
    panel = load_inputs(args.data, args.treated, args.t0, args.covariates, args.v_weights);
  } catch (const smc::SmcError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    const smc::PlaceboResult result = smc::run_placebo(panel, methods, opt);
    if (args.out.empty()) {
      smc::write_placebo_csv(result, std::cout);
    } else {
      smc::write_placebo_csv(result, args.out + ".csv");
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic matching control estimation for panel data"};
  app.require_subcommand(1);

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Estimate a counterfactual path");
  fit_cmd->add_option("--data", fit.data, "Panel CSV (time column + one column per unit)")
      ->required();
  fit_cmd->add_option("--treated", fit.treated, "Label of the treated unit")->required();
  fit_cmd->add_option("--t0", fit.t0, "Number of pre-treatment periods")->required();
  fit_cmd->add_option("--method", fit.method, "Estimator")
      ->check(CLI::IsMember({"smc", "sc", "dsc", "ols"}));
  fit_cmd->add_option("--covariates", fit.covariates, "Covariate CSV (one row per covariate)");
  fit_cmd->add_option("--v-weights", fit.v_weights,
                      "CSV with one nonnegative weight per pre-period row");
  fit_cmd->add_option("--variance-variant", fit.variance,
                      "Noise variance estimator: appendix (dof-adjusted) or maintext");
  fit_cmd->add_option("--screen", fit.screen, "Unit screening: auto, off or a donor count");
  fit_cmd->add_option("--out", fit.out, "Output prefix (writes <out>.json, <out>_paths.csv)");

  SimArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo over a synthetic design");
  sim_cmd->add_option("--config", sim.config, "key=value design file")->required();
  sim_cmd->add_option("--out", sim.out, "Output prefix (writes <out>.csv, <out>.json)");

  PlaceboArgs pl;
  CLI::App* pl_cmd = app.add_subcommand("placebo", "Refit each donor as pseudo-treated");
  pl_cmd->add_option("--data", pl.data, "Panel CSV")->required();
  pl_cmd->add_option("--treated", pl.treated, "Label of the treated unit (excluded from refits)")
      ->required();
  pl_cmd->add_option("--t0", pl.t0, "Number of pre-treatment periods")->required();
  pl_cmd->add_option("--methods", pl.methods, "Comma separated list, default all four");
  pl_cmd->add_option("--covariates", pl.covariates, "Covariate CSV");
  pl_cmd->add_option("--v-weights", pl.v_weights, "Diagonal time weight CSV");
  pl_cmd->add_option("--variance-variant", pl.variance, "appendix or maintext");
  pl_cmd->add_option("--screen", pl.screen, "auto, off or a donor count");
  pl_cmd->add_option("--out", pl.out, "Output prefix (writes <out>.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (fit_cmd->parsed()) return run_fit(fit);
  if (sim_cmd->parsed()) return run_simulate(sim);
  return run_placebo(pl);
}
