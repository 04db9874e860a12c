#pragma once
// Simulation harness: synthetic data generating processes, Monte Carlo
// evaluation of every estimator, placebo refits over donor units, and
// numerical checks of the identities behind the weight criterion.
//
// Reproducibility contract: repetition r of a run with master seed s draws
// exclusively from Rng::substream(s, r), and all draws happen in a fixed
// documented order (see gen_factor_dgp / gen_working_dgp). Results are merged
// in repetition order, so outputs are byte-identical across runs and across
// worker thread counts. SMC_THREADS caps the worker pool.

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "smc/baselines.hpp"
#include "smc/estimator.hpp"
#include "smc/panel.hpp"

namespace smc {

enum class Dgp { factor, working };

// Factor loading layouts, unit 0 treated:
//   l1: units 1..7 load 1 (treated included), the rest 0
//   l2: treated loads 3, units 2..7 load 1, the rest 0
//   l3: treated loads 3, every donor loads 1
enum class LambdaPattern { l1, l2, l3 };

struct SimConfig {
  Dgp dgp = Dgp::factor;
  int T = 50;
  int t0 = 40;
  int J = 20;
  LambdaPattern lambda = LambdaPattern::l2;
  double sigma = 1.0;  // factor model noise sd
  double c = 1.0;      // working model: total signal sum over the 7 live donors
  double r2 = 0.8;     // working model: target signal share of variance
  double rho = 0.8;    // working model: cross-donor correlation decay
  int reps = 200;
  std::uint64_t seed = 0x5eed0001ULL;
  std::vector<std::string> methods{"smc", "sc", "dsc", "ols"};
};

// Per-repetition ground truth kept alongside the generated panel.
struct SimTruth {
  Eigen::VectorXd mu1;       // noiseless treated path, length T
  Eigen::VectorXd sigma_t;   // treated noise sd over the pre-period
  Eigen::VectorXd loadings;  // factor model, unit order, length J+1
  Eigen::VectorXd alpha;     // realized common shocks
  Eigen::VectorXd factor;    // realized common factor
  Eigen::VectorXd theta;     // working model coefficients, length J
};

// Y_jt = alpha_t + lambda_j F_t + eps_jt with alpha_t, F_t iid N(0,1) shared
// by all units and eps_jt iid N(0, sigma^2). Draw order within the
// repetition's substream: alpha_1..alpha_T, F_1..F_T, then eps unit-major
// (treated first), period-minor.
std::pair<PanelData, SimTruth> gen_factor_dgp(const SimConfig& cfg, std::uint64_t rep);

// y_1 = Y0 theta + eps. Rows of Y0 are iid with cov(z_i, z_k) = rho^|i-k|,
// generated by the AR(1) recursion z_i = rho z_{i-1} + sqrt(1-rho^2) u_i.
// theta puts c/7 on the first seven donors. The noise is heteroskedastic,
// sigma_t^2 = sigma0^2 ||y^t||^2 / (J + ||y^t||^2), with sigma0^2 calibrated
// so the signal explains about r2 of the variance. Draw order: Y0 rows
// period-major (u_1..u_J within a row), then eps_1..eps_T.
std::pair<PanelData, SimTruth> gen_working_dgp(const SimConfig& cfg, std::uint64_t rep);

std::pair<PanelData, SimTruth> generate(const SimConfig& cfg, std::uint64_t rep);

// Mean squared prediction error over the post-period.
double mspe(const Eigen::VectorXd& counterfactual, const Eigen::VectorXd& truth_path,
            int t0);
double mspe(const EstimatorOutput& out, const Eigen::VectorXd& truth_path, int t0);

// Dispatch by method name: "smc", "sc", "dsc" or "ols".
EstimatorOutput fit_method(const std::string& method, const PanelData& panel,
                           const SmcOptions& smc_opt = {});

struct MonteCarloCell {
  std::string method;
  double mean_mspe = 0.0;
  double se = 0.0;
  int failures = 0;
};

struct MonteCarloTable {
  SimConfig cfg;
  std::vector<MonteCarloCell> cells;            // one per configured method
  std::vector<std::vector<double>> rep_mspe;    // [method][rep], NaN = failed fit
};

MonteCarloTable run_monte_carlo(const SimConfig& cfg);
void write_monte_carlo_csv(const MonteCarloTable& table, std::ostream& out);
void write_monte_carlo_csv(const MonteCarloTable& table, const std::string& path);
void write_monte_carlo_json(const MonteCarloTable& table, const std::string& path);

struct PlaceboResult {
  std::vector<std::string> rows;  // donor labels in panel order, then "average"
  std::vector<std::string> methods;
  Eigen::MatrixXd values;         // rows x methods, post-period mspe
};

// Refits every method once per donor, treating that donor as the unit of
// interest with the original treated unit removed from the pool entirely.
PlaceboResult run_placebo(const PanelData& panel, const std::vector<std::string>& methods,
                          const SmcOptions& smc_opt = {});
void write_placebo_csv(const PlaceboResult& result, std::ostream& out);
void write_placebo_csv(const PlaceboResult& result, const std::string& path);

// Splits yhat(w) - mu into the matching component sum_j w_j (theta_j yjc - y1c)
// and the remainder (sum w - 1) mu + (sum w) eps, both over the pre-period.
// Their sum reproduces yhat(w) - mu exactly.
std::pair<Eigen::VectorXd, Eigen::VectorXd> decompose_error(
    const Eigen::VectorXd& w, const std::vector<MatchedControl>& matched,
    const CenteredPanel& cp, const SimTruth& truth);

struct RiskCheckReport {
  double gap_mean = 0.0;
  double gap_se = 0.0;
  double max_leverage_dev = 0.0;  // worst |sum_t l_jt - 1| seen
  int reps = 0;
};

// Monte Carlo check that ||yhat(w)-y1||^2 + 2 sum_j w_j sigma_j^2 - sum_t
// sigma_t^2 is an unbiased estimate of the loss ||yhat(w)-mu||^2, with
// sigma_j^2 = sum_t sigma_t^2 l_jt and l_jt the matching leverages. Works on
// raw (uncentered) pre-period vectors, where the identity is exact.
RiskCheckReport oracle_risk_check(const SimConfig& cfg, const Eigen::VectorXd& w,
                                  int reps);

struct OptimalityCell {
  int t0 = 0;
  double median_ratio = 0.0;
  double p90_ratio = 0.0;
  std::vector<double> ratios;  // per repetition, repetition order
};

// Loss of the selected weights relative to the loss of the weights an oracle
// with the noiseless treated path would pick from the same donor fits.
std::vector<OptimalityCell> optimality_ratio(const SimConfig& base,
                                             const std::vector<int>& t0_grid);

// Flat key=value file (see README for the key list). Unknown keys are errors.
SimConfig parse_sim_config(const std::string& path);
void validate_config(const SimConfig& cfg);

}  // namespace smc
