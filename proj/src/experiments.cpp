#include "smc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "smc/errors.hpp"
#include "smc/matching.hpp"
#include "smc/optim.hpp"
#include "smc/rng.hpp"

namespace smc {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string unit_label(int pos, int num_donors) {
  if (pos == 0) return "treated";
  std::size_t width = 1;
  for (int v = num_donors; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(pos);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "donor" + digits;
}

PanelData assemble_panel(const Eigen::MatrixXd& outcomes, int t0) {
  PanelData panel;
  panel.outcomes = outcomes;
  panel.treated = 0;
  panel.t0 = t0;
  const int n = static_cast<int>(outcomes.cols());
  for (int u = 0; u < n; ++u) panel.unit_labels.push_back(unit_label(u, n - 1));
  for (int t = 0; t < outcomes.rows(); ++t)
    panel.time_labels.push_back(std::to_string(t + 1));
  return panel;
}

const char* dgp_name(Dgp d) { return d == Dgp::factor ? "factor" : "working"; }

const char* pattern_name(LambdaPattern p) {
  switch (p) {
    case LambdaPattern::l1: return "l1";
    case LambdaPattern::l2: return "l2";
    case LambdaPattern::l3: return "l3";
  }
  return "?";
}

// Worker pool over [0, jobs). The callable must not throw. Thread count
// comes from SMC_THREADS when set, otherwise the hardware concurrency.
void run_parallel(int jobs, const std::function<void(int)>& fn) {
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SMC_THREADS")) {
    int parsed = 0;
    auto [p, ec] = std::from_chars(env, env + std::strlen(env), parsed);
    if (ec == std::errc() && *p == '\0' && parsed > 0) threads = parsed;
  }
  threads = std::max(1, std::min(threads, jobs));
  if (threads == 1) {
    for (int i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int k = 0; k < threads; ++k) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= jobs) break;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

double sample_mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Standard error of the mean, zero when fewer than two observations.
double mean_se(const std::vector<double>& xs, double mean) {
  const auto n = xs.size();
  if (n < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const auto n = sorted.size();
  if (n == 0) return kNan;
  const auto idx = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(n))); // nearest-rank
  return sorted[std::min(n, std::max<std::size_t>(idx, 1)) - 1];
}

double median_sorted(const std::vector<double>& sorted) {
  const auto n = sorted.size();
  if (n == 0) return kNan;
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> ms{"smc", "sc", "dsc", "ols"};
  return ms;
}

}  // namespace

void validate_config(const SimConfig& cfg) {
  if (cfg.T < 2) fail(ErrorCode::InvalidConfig, "T must be at least 2");
  if (cfg.t0 < 1 || cfg.t0 >= cfg.T)
    fail(ErrorCode::InvalidConfig, "t0 must satisfy 1 <= t0 < T");
  if (cfg.J < 1) fail(ErrorCode::InvalidConfig, "J must be positive");
  if (!(cfg.sigma >= 0.0) || !std::isfinite(cfg.sigma))
    fail(ErrorCode::InvalidConfig, "sigma must be nonnegative");
  if (!std::isfinite(cfg.c)) fail(ErrorCode::InvalidConfig, "c must be finite");
  if (!(cfg.r2 > 0.0 && cfg.r2 < 1.0))
    fail(ErrorCode::InvalidConfig, "r2 must lie strictly between 0 and 1");
  if (!(std::abs(cfg.rho) < 1.0))
    fail(ErrorCode::InvalidConfig, "rho must lie strictly between -1 and 1");
  if (cfg.reps < 1) fail(ErrorCode::InvalidConfig, "reps must be positive");
  if (cfg.methods.empty()) fail(ErrorCode::InvalidConfig, "methods must not be empty");
  for (const auto& m : cfg.methods) {
    const auto& ok = known_methods();
    if (std::find(ok.begin(), ok.end(), m) == ok.end())
      fail(ErrorCode::InvalidConfig, "unknown method '" + m + "'");
  }
}

std::pair<PanelData, SimTruth> gen_factor_dgp(const SimConfig& cfg, std::uint64_t rep) {
  const int T = cfg.T, J = cfg.J;
  Rng rng = Rng::substream(cfg.seed, rep);

  Eigen::VectorXd alpha(T), factor(T);
  for (int t = 0; t < T; ++t) alpha[t] = rng.normal();
  for (int t = 0; t < T; ++t) factor[t] = rng.normal();

  Eigen::VectorXd loadings = Eigen::VectorXd::Zero(J + 1);
  switch (cfg.lambda) {
    case LambdaPattern::l1:
      for (int u = 0; u <= std::min(6, J); ++u) loadings[u] = 1.0;
      break;
    case LambdaPattern::l2:
      loadings[0] = 3.0;
      for (int u = 1; u <= std::min(6, J); ++u) loadings[u] = 1.0;
      break;
    case LambdaPattern::l3:
      loadings[0] = 3.0;
      loadings.tail(J).setOnes();
      break;
  }

  Eigen::MatrixXd outcomes(T, J + 1);
  for (int u = 0; u <= J; ++u)
    for (int t = 0; t < T; ++t)
      outcomes(t, u) = alpha[t] + loadings[u] * factor[t] + cfg.sigma * rng.normal();

  SimTruth truth;
  truth.mu1 = alpha + loadings[0] * factor;
  truth.sigma_t = Eigen::VectorXd::Constant(cfg.t0, cfg.sigma);
  truth.loadings = loadings;
  truth.alpha = alpha;
  truth.factor = factor;
  return {assemble_panel(outcomes, cfg.t0), truth};
}

std::pair<PanelData, SimTruth> gen_working_dgp(const SimConfig& cfg, std::uint64_t rep) {
  const int T = cfg.T, J = cfg.J;
  Rng rng = Rng::substream(cfg.seed, rep);

  Eigen::MatrixXd donors(T, J);
  const double carry = std::sqrt(1.0 - cfg.rho * cfg.rho);
  for (int t = 0; t < T; ++t) {
    donors(t, 0) = rng.normal();
    for (int j = 1; j < J; ++j)
      donors(t, j) = cfg.rho * donors(t, j - 1) + carry * rng.normal();
  }

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(J);
  theta.head(std::min(7, J)).setConstant(cfg.c / 7.0);
  const Eigen::VectorXd mu = donors * theta;

  // Pick the noise scale so the signal explains roughly r2 of the treated
  // variance given the period-specific shrinkage h_t.
  Eigen::VectorXd h(T);
  for (int t = 0; t < T; ++t) {
    const double s = donors.row(t).squaredNorm();
    h[t] = s / (static_cast<double>(J) + s);
  }
  const double mu_mean = mu.mean();
  const double var_mu =
      (mu.array() - mu_mean).square().sum() / static_cast<double>(T - 1);
  const double mean_h = h.mean();
  double sigma0_sq = 0.0;
  if (var_mu > 0.0 && mean_h > 0.0)
    sigma0_sq = var_mu * (1.0 - cfg.r2) / (cfg.r2 * mean_h);

  Eigen::VectorXd y1(T), sd(T);
  for (int t = 0; t < T; ++t) {
    sd[t] = std::sqrt(sigma0_sq * h[t]);
    y1[t] = mu[t] + sd[t] * rng.normal();
  }

  Eigen::MatrixXd outcomes(T, J + 1);
  outcomes.col(0) = y1;
  outcomes.rightCols(J) = donors;

  SimTruth truth;
  truth.mu1 = mu;
  truth.sigma_t = sd.head(cfg.t0);
  truth.theta = theta;
  return {assemble_panel(outcomes, cfg.t0), truth};
}

std::pair<PanelData, SimTruth> generate(const SimConfig& cfg, std::uint64_t rep) {
  return cfg.dgp == Dgp::factor ? gen_factor_dgp(cfg, rep) : gen_working_dgp(cfg, rep);
}

double mspe(const Eigen::VectorXd& counterfactual, const Eigen::VectorXd& truth_path,
            int t0) {
  if (counterfactual.size() != truth_path.size())
    fail(ErrorCode::LengthMismatch, "paths differ in length");
  const int T = static_cast<int>(truth_path.size());
  if (t0 < 0 || t0 >= T) fail(ErrorCode::InvalidSplit, "t0 out of range for mspe");
  return (counterfactual.tail(T - t0) - truth_path.tail(T - t0)).squaredNorm() /
         static_cast<double>(T - t0);
}

double mspe(const EstimatorOutput& out, const Eigen::VectorXd& truth_path, int t0) {
  return mspe(out.counterfactual, truth_path, t0);
}

EstimatorOutput fit_method(const std::string& method, const PanelData& panel,
                           const SmcOptions& smc_opt) {
  if (method == "smc") return fit_smc(panel, smc_opt);
  BaselineOptions opt;
  opt.qp_tol = smc_opt.qp_tol;
  opt.qp_max_iter = smc_opt.qp_max_iter;
  if (method == "sc") return fit_sc(panel, opt);
  if (method == "dsc") return fit_dsc(panel, opt);
  if (method == "ols") return fit_ols(panel);
  fail(ErrorCode::InvalidConfig, "unknown method '" + method + "'");
}

MonteCarloTable run_monte_carlo(const SimConfig& cfg) {
  validate_config(cfg);
  const int M = static_cast<int>(cfg.methods.size());

  MonteCarloTable table;
  table.cfg = cfg;
  table.rep_mspe.assign(M, std::vector<double>(cfg.reps, kNan));

  run_parallel(cfg.reps, [&](int rep) {
    PanelData panel;
    SimTruth truth;
    try {
      std::tie(panel, truth) = generate(cfg, static_cast<std::uint64_t>(rep));
    } catch (const std::exception&) {
      return;  // all methods stay NaN for this repetition
    }
    for (int m = 0; m < M; ++m) {
      try {
        const EstimatorOutput out = fit_method(cfg.methods[m], panel);
        table.rep_mspe[m][rep] = mspe(out, truth.mu1, cfg.t0);
      } catch (const std::exception&) {
        // leave NaN; counted as a failure below
      }
    }
  });

  for (int m = 0; m < M; ++m) {
    MonteCarloCell cell;
    cell.method = cfg.methods[m];
    std::vector<double> ok;
    ok.reserve(cfg.reps);
    for (double v : table.rep_mspe[m])
      if (std::isfinite(v)) ok.push_back(v);
    cell.failures = cfg.reps - static_cast<int>(ok.size());
    if (!ok.empty()) {
      cell.mean_mspe = sample_mean(ok);
      cell.se = mean_se(ok, cell.mean_mspe);
    } else {
      cell.mean_mspe = kNan;
      cell.se = kNan;
    }
    table.cells.push_back(std::move(cell));
  }
  return table;
}

void write_monte_carlo_csv(const MonteCarloTable& table, std::ostream& out) {
  out << "dgp,lambda,T,t0,J,sigma,c,r2,rho,reps,seed,method,mean_mspe,se,failures\n";
  const SimConfig& c = table.cfg;
  for (const auto& cell : table.cells) {
    out << dgp_name(c.dgp) << ',' << pattern_name(c.lambda) << ',' << c.T << ','
        << c.t0 << ',' << c.J << ',' << to_g17(c.sigma) << ',' << to_g17(c.c) << ','
        << to_g17(c.r2) << ',' << to_g17(c.rho) << ',' << c.reps << ',' << c.seed
        << ',' << cell.method << ',' << to_g17(cell.mean_mspe) << ','
        << to_g17(cell.se) << ',' << cell.failures << '\n';
  }
}

void write_monte_carlo_csv(const MonteCarloTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::MissingValue, "cannot open '" + path + "' for writing");
  write_monte_carlo_csv(table, static_cast<std::ostream&>(out));
  if (!out) fail(ErrorCode::MissingValue, "write failed for '" + path + "'");
}

void write_monte_carlo_json(const MonteCarloTable& table, const std::string& path) {
  nlohmann::json j;
  const SimConfig& c = table.cfg;
  j["config"] = {{"dgp", dgp_name(c.dgp)}, {"lambda", pattern_name(c.lambda)},
                 {"T", c.T},               {"t0", c.t0},
                 {"J", c.J},               {"sigma", c.sigma},
                 {"c", c.c},               {"r2", c.r2},
                 {"rho", c.rho},           {"reps", c.reps},
                 {"seed", c.seed},         {"methods", c.methods}};
  j["results"] = nlohmann::json::array();
  for (const auto& cell : table.cells)
    j["results"].push_back({{"method", cell.method},
                            {"mean_mspe", cell.mean_mspe},
                            {"se", cell.se},
                            {"failures", cell.failures}});
  j["rep_mspe"] = nlohmann::json::object();
  for (std::size_t m = 0; m < table.cells.size(); ++m)
    j["rep_mspe"][table.cells[m].method] = table.rep_mspe[m];

  std::ofstream out(path);
  if (!out) fail(ErrorCode::MissingValue, "cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::MissingValue, "write failed for '" + path + "'");
}

namespace {

// Panel with the original treated column removed and donor `donor_pos`
// promoted to the unit of interest.
PanelData make_placebo_panel(const PanelData& panel, int donor_pos) {
  const auto donors = panel.donor_columns();
  const int target_col = donors[donor_pos];
  PanelData sub;
  sub.t0 = panel.t0;
  const int n = panel.num_units();
  const auto rows = panel.outcomes.rows();
  sub.outcomes.resize(rows, n - 1);
  int kept = 0;
  for (int u = 0; u < n; ++u) {
    if (u == panel.treated) continue;
    sub.outcomes.col(kept) = panel.outcomes.col(u);
    sub.unit_labels.push_back(panel.unit_labels[u]);
    if (u == target_col) sub.treated = kept;
    ++kept;
  }
  sub.time_labels = panel.time_labels;
  if (panel.covariates) {
    Eigen::MatrixXd cov(panel.covariates->rows(), n - 1);
    int c = 0;
    for (int u = 0; u < n; ++u) {
      if (u == panel.treated) continue;
      cov.col(c++) = panel.covariates->col(u);
    }
    sub.covariates = std::move(cov);
    sub.covariate_labels = panel.covariate_labels;
  }
  sub.validate();
  return sub;
}

}  // namespace

PlaceboResult run_placebo(const PanelData& panel, const std::vector<std::string>& methods,
                          const SmcOptions& smc_opt) {
  panel.validate();
  if (methods.empty()) fail(ErrorCode::InvalidConfig, "methods must not be empty");
  for (const auto& m : methods) {
    const auto& ok = known_methods();
    if (std::find(ok.begin(), ok.end(), m) == ok.end())
      fail(ErrorCode::InvalidConfig, "unknown method '" + m + "'");
  }
  const auto donors = panel.donor_columns();
  const int J = static_cast<int>(donors.size());
  if (J < 2) fail(ErrorCode::EmptyDonorPool, "placebo needs at least two donors");
  const int M = static_cast<int>(methods.size());

  PlaceboResult result;
  result.methods = methods;
  for (int col : donors) result.rows.push_back(panel.unit_labels[col]);
  result.rows.push_back("average");
  result.values.setConstant(J + 1, M, kNan);

  run_parallel(J, [&](int dj) {
    PanelData sub;
    try {
      sub = make_placebo_panel(panel, dj);
    } catch (const std::exception&) {
      return;
    }
    const Eigen::VectorXd actual = sub.treated_path();
    for (int m = 0; m < M; ++m) {
      try {
        const EstimatorOutput out = fit_method(methods[m], sub, smc_opt);
        result.values(dj, m) = mspe(out, actual, sub.t0);
      } catch (const std::exception&) {
        // leave NaN for this cell
      }
    }
  });

  for (int m = 0; m < M; ++m)
    result.values(J, m) = result.values.col(m).head(J).mean();
  return result;
}

void write_placebo_csv(const PlaceboResult& result, std::ostream& out) {
  out << "unit";
  for (const auto& m : result.methods) out << ',' << m;
  out << '\n';
  for (std::size_t r = 0; r < result.rows.size(); ++r) {
    out << result.rows[r];
    for (int m = 0; m < result.values.cols(); ++m)
      out << ',' << to_g17(result.values(static_cast<int>(r), m));
    out << '\n';
  }
}

void write_placebo_csv(const PlaceboResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::MissingValue, "cannot open '" + path + "' for writing");
  write_placebo_csv(result, static_cast<std::ostream&>(out));
  if (!out) fail(ErrorCode::MissingValue, "write failed for '" + path + "'");
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> decompose_error(
    const Eigen::VectorXd& w, const std::vector<MatchedControl>& matched,
    const CenteredPanel& cp, const SimTruth& truth) {
  const int t0 = cp.t0();
  const int J = cp.num_donors();
  if (static_cast<int>(w.size()) != J)
    fail(ErrorCode::LengthMismatch, "weight vector does not match the donor count");
  if (static_cast<int>(matched.size()) != J)
    fail(ErrorCode::LengthMismatch, "matched fits do not match the donor count");
  if (truth.mu1.size() < t0)
    fail(ErrorCode::TruthUnavailable, "noiseless path shorter than the pre-period");

  // Centering mu by the observed treated mean keeps eps = y1 - mu1 exact.
  const Eigen::VectorXd mu_c =
      (truth.mu1.head(t0).array() - cp.y1_mean).matrix();
  const Eigen::VectorXd eps = cp.y1c - mu_c;
  const double wsum = w.sum();

  Eigen::VectorXd interp = Eigen::VectorXd::Zero(t0);
  for (int j = 0; j < J; ++j) {
    if (w[j] == 0.0) continue;
    interp += w[j] * (matched[j].fitted_pre - cp.y1c);
  }
  const Eigen::VectorXd extrap = (wsum - 1.0) * mu_c + wsum * eps;
  return {interp, extrap};
}

RiskCheckReport oracle_risk_check(const SimConfig& cfg, const Eigen::VectorXd& w,
                                  int reps) {
  validate_config(cfg);
  if (static_cast<int>(w.size()) != cfg.J)
    fail(ErrorCode::LengthMismatch, "weight vector does not match J");
  if (reps < 2) fail(ErrorCode::InvalidConfig, "risk check needs at least 2 reps");

  std::vector<double> gaps(reps, kNan);
  std::vector<double> worst(reps, 0.0);
  run_parallel(reps, [&](int rep) {
    auto [panel, truth] = generate(cfg, static_cast<std::uint64_t>(rep));
    const int t0 = cfg.t0, J = cfg.J;
    // Raw pre-period vectors; the unbiasedness identity is exact only
    // without empirical centering.
    const Eigen::VectorXd y1 = panel.outcomes.col(0).head(t0);
    const Eigen::VectorXd mu = truth.mu1.head(t0);
    const Eigen::VectorXd s2 = truth.sigma_t.array().square().matrix();

    Eigen::VectorXd yhat = Eigen::VectorXd::Zero(t0);
    double penalty = 0.0;
    double dev = 0.0;
    for (int j = 0; j < J; ++j) {
      const Eigen::VectorXd yj = panel.outcomes.col(j + 1).head(t0);
      const double nj = yj.squaredNorm();
      if (nj <= 0.0) continue;
      const double theta = yj.dot(y1) / nj;
      yhat += w[j] * theta * yj;
      const Eigen::VectorXd lev = (yj.array().square() / nj).matrix();
      dev = std::max(dev, std::abs(lev.sum() - 1.0));
      penalty += w[j] * lev.dot(s2);
    }
    gaps[rep] = (yhat - y1).squaredNorm() + 2.0 * penalty - s2.sum() -
                (yhat - mu).squaredNorm();
    worst[rep] = dev;
  });

  RiskCheckReport report;
  report.reps = reps;
  report.gap_mean = sample_mean(gaps);
  report.gap_se = mean_se(gaps, report.gap_mean);
  report.max_leverage_dev = *std::max_element(worst.begin(), worst.end());
  return report;
}

std::vector<OptimalityCell> optimality_ratio(const SimConfig& base,
                                             const std::vector<int>& t0_grid) {
  validate_config(base);
  if (t0_grid.empty()) fail(ErrorCode::InvalidConfig, "t0 grid must not be empty");
  const int post = base.T - base.t0;

  std::vector<OptimalityCell> cells;
  for (int t0 : t0_grid) {
    SimConfig cfg = base;
    cfg.t0 = t0;
    cfg.T = t0 + post;
    validate_config(cfg);

    OptimalityCell cell;
    cell.t0 = t0;
    cell.ratios.assign(cfg.reps, kNan);
    run_parallel(cfg.reps, [&](int rep) {
      try {
        auto [panel, truth] = generate(cfg, static_cast<std::uint64_t>(rep));
        const CenteredPanel cp = center_pretreatment(panel);
        const auto matched = match_all(cp);
        const double sigma2 =
            estimate_noise_variance(cp, VarianceVariant::dof_adjusted);
        const WeightSolution sel = solve_cp_weights(matched, cp, sigma2, {});

        const Eigen::VectorXd mu_pre = truth.mu1.head(t0);
        const Eigen::VectorXd mu_c = (mu_pre.array() - mu_pre.mean()).matrix();

        const int J = cp.num_donors();
        auto loss = [&](const Eigen::VectorXd& w) {
          Eigen::VectorXd fit = Eigen::VectorXd::Zero(t0);
          for (int j = 0; j < J; ++j) fit += w[j] * matched[j].fitted_pre;
          return (fit - mu_c).squaredNorm();
        };

        // Oracle: same donor fits, same box, but the target is the noiseless
        // centered path rather than the observed one.
        QuadraticProgram qp;
        qp.q.setZero(J, J);
        qp.lin.setZero(J);
        for (int j = 0; j < J; ++j) {
          qp.lin[j] = matched[j].fitted_pre.dot(mu_c);
          for (int k = j; k < J; ++k) {
            qp.q(j, k) = matched[j].fitted_pre.dot(matched[k].fitted_pre);
            qp.q(k, j) = qp.q(j, k);
          }
        }
        qp.const_term = mu_c.squaredNorm();
        QpOptions oracle_opt;
        oracle_opt.tol = 1e-10;
        const QpSolution oracle = solve_box_qp(qp, oracle_opt);

        const double num = loss(sel.w);
        const double den = loss(oracle.w);
        cell.ratios[rep] = den > 0.0 ? num / den : 1.0;
      } catch (const std::exception&) {
        // leave NaN
      }
    });

    std::vector<double> sorted;
    for (double r : cell.ratios)
      if (std::isfinite(r)) sorted.push_back(r);
    std::sort(sorted.begin(), sorted.end());
    cell.median_ratio = median_sorted(sorted);
    cell.p90_ratio = quantile_sorted(sorted, 0.9);
    cells.push_back(std::move(cell));
  }
  return cells;
}

namespace {

std::string trim_copy(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int parse_int_field(const std::string& key, const std::string& v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    fail(ErrorCode::InvalidConfig, "bad integer for '" + key + "': " + v);
  return out;
}

std::uint64_t parse_u64_field(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    fail(ErrorCode::InvalidConfig, "bad seed for '" + key + "': " + v);
  return out;
}

double parse_double_field(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    fail(ErrorCode::InvalidConfig, "bad number for '" + key + "': " + v);
  return out;
}

}  // namespace

SimConfig parse_sim_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MissingValue, "cannot open config '" + path + "'");
  SimConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim_copy(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::InvalidConfig,
           "line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim_copy(s.substr(0, eq));
    const std::string val = trim_copy(s.substr(eq + 1));
    if (key == "dgp") {
      if (val == "factor") cfg.dgp = Dgp::factor;
      else if (val == "working") cfg.dgp = Dgp::working;
      else fail(ErrorCode::InvalidConfig, "dgp must be 'factor' or 'working'");
    } else if (key == "lambda") {
      if (val == "l1") cfg.lambda = LambdaPattern::l1;
      else if (val == "l2") cfg.lambda = LambdaPattern::l2;
      else if (val == "l3") cfg.lambda = LambdaPattern::l3;
      else fail(ErrorCode::InvalidConfig, "lambda must be l1, l2 or l3");
    } else if (key == "T") {
      cfg.T = parse_int_field(key, val);
    } else if (key == "t0") {
      cfg.t0 = parse_int_field(key, val);
    } else if (key == "J") {
      cfg.J = parse_int_field(key, val);
    } else if (key == "sigma") {
      cfg.sigma = parse_double_field(key, val);
    } else if (key == "c") {
      cfg.c = parse_double_field(key, val);
    } else if (key == "r2") {
      cfg.r2 = parse_double_field(key, val);
    } else if (key == "rho") {
      cfg.rho = parse_double_field(key, val);
    } else if (key == "reps") {
      cfg.reps = parse_int_field(key, val);
    } else if (key == "seed") {
      cfg.seed = parse_u64_field(key, val);
    } else if (key == "methods") {
      cfg.methods.clear();
      std::stringstream ss(val);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        const std::string m = trim_copy(tok);
        if (!m.empty()) cfg.methods.push_back(m);
      }
    } else {
      fail(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
    }
  }
  validate_config(cfg);
  return cfg;
}

}  // namespace smc
