#include "smc/estimator.hpp"

#include <algorithm>
#include <cmath>

namespace smc {

namespace {

std::vector<int> usable_donors(const CenteredPanel& cp) {
  std::vector<int> idx;
  for (int j = 0; j < cp.num_donors(); ++j)
    if (!cp.degenerate[j]) idx.push_back(j);
  return idx;
}

}  // namespace

double estimate_noise_variance(const CenteredPanel& cp, VarianceVariant variant) {
  const auto usable = usable_donors(cp);
  const int m = static_cast<int>(usable.size());
  const int t0 = cp.t0();
  if (m == 0)
    fail(ErrorCode::AllUnitsDegenerate, "no usable donors for the noise estimate");

  if (variant == VarianceVariant::diag_residual) {
    Eigen::VectorXd resid = cp.y1c;
    for (int j : usable) {
      const auto yjc = cp.y0c.col(j);
      resid -= (yjc.dot(cp.y1c) / yjc.dot(yjc)) * yjc;
    }
    return resid.squaredNorm();
  }

  if (t0 <= m)
    fail(ErrorCode::InsufficientPeriods,
         "dof-adjusted variance needs t0 > J, got t0=" + std::to_string(t0) +
             " with J=" + std::to_string(m));

  Eigen::MatrixXd y0(t0, m);
  for (int j = 0; j < m; ++j) y0.col(j) = cp.y0c.col(usable[j]);

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(y0);
  if (cod.rank() < m)
    fail(ErrorCode::RankDeficient,
         "donor block has rank " + std::to_string(cod.rank()) + " < " +
             std::to_string(m));
  const Eigen::VectorXd resid = cp.y1c - y0 * cod.solve(cp.y1c);
  return resid.squaredNorm() / static_cast<double>(t0 - m);
}

double cp_criterion(const Eigen::VectorXd& w, const std::vector<MatchedControl>& matched,
                    const CenteredPanel& cp, double sigma2) {
  const int J = cp.num_donors();
  if (static_cast<int>(w.size()) != J || static_cast<int>(matched.size()) != J)
    fail(ErrorCode::LengthMismatch, "weight vector does not match the donor count");

  Eigen::VectorXd resid = cp.y1c;
  for (int j = 0; j < J; ++j)
    if (w[j] != 0.0) resid -= w[j] * matched[j].fitted_pre;
  return resid.squaredNorm() + 2.0 * sigma2 * w.sum();
}

QuadraticProgram cp_quadratic_program(const std::vector<MatchedControl>& matched,
                                      const CenteredPanel& cp, double sigma2) {
  const int J = cp.num_donors();
  if (static_cast<int>(matched.size()) != J)
    fail(ErrorCode::LengthMismatch, "matched fits do not match the donor count");

  Eigen::MatrixXd fitted(cp.t0(), J);
  for (int j = 0; j < J; ++j) fitted.col(j) = matched[j].fitted_pre;

  QuadraticProgram qp;
  qp.q = fitted.transpose() * fitted;
  qp.lin = fitted.transpose() * cp.y1c;
  qp.lin.array() -= sigma2;  // d/dw of the 2*sigma2*sum(w) penalty, folded in
  qp.const_term = cp.y1c.squaredNorm();
  return qp;
}

WeightSolution solve_cp_weights(const std::vector<MatchedControl>& matched,
                                const CenteredPanel& cp, double sigma2,
                                const SmcOptions& opt) {
  const QuadraticProgram qp = cp_quadratic_program(matched, cp, sigma2);
  QpOptions qo;
  qo.tol = opt.qp_tol;
  qo.max_iter = opt.qp_max_iter;
  QpSolution qs = solve_box_qp(qp, qo);

  // Excluded donors have a flat or increasing criterion direction; pin them
  // at zero so their slot stays meaningful.
  for (const auto& m : matched)
    if (m.excluded) qs.w[m.unit] = 0.0;

  WeightSolution ws;
  ws.w = std::move(qs.w);
  ws.sigma2_hat = sigma2;
  ws.criterion = cp_criterion(ws.w, matched, cp, sigma2);
  ws.iterations = qs.iterations;
  ws.converged = qs.converged;
  return ws;
}

Eigen::VectorXd predict_counterfactual(const Eigen::VectorXd& w,
                                       const std::vector<MatchedControl>& matched,
                                       const CenteredPanel& cp,
                                       const PanelData& outcome_panel) {
  const int J = cp.num_donors();
  if (static_cast<int>(w.size()) != J || static_cast<int>(matched.size()) != J ||
      outcome_panel.num_donors() != J)
    fail(ErrorCode::LengthMismatch, "weights, fits and panel disagree on donor count");

  const auto donors = outcome_panel.donor_columns();
  Eigen::VectorXd path =
      Eigen::VectorXd::Constant(outcome_panel.T(), cp.y1_mean);
  for (int j = 0; j < J; ++j) {
    const double coef = w[j] * matched[j].theta;
    if (coef == 0.0) continue;
    path += coef * (outcome_panel.outcomes.col(donors[j]).array() -
                    cp.donor_means[j])
                       .matrix();
  }
  return path;
}

EstimatorOutput fit_smc(const PanelData& panel, const SmcOptions& opt) {
  panel.validate();
  const int J = panel.num_donors();
  const int p = panel.covariates ? static_cast<int>(panel.covariates->rows()) : 0;
  const int block_len = panel.t0 + p;

  EstimatorOutput out;
  out.method = "smc";

  // Screening happens first, on the raw pre-period outcomes, so the matching
  // block afterwards is narrow enough for the dof-adjusted noise estimate.
  std::vector<int> kept;  // original donor positions, ascending
  bool screened = false;
  if (opt.screen == ScreenMode::fixed ||
      (opt.screen == ScreenMode::automatic && J >= block_len - 1)) {
    const int d = opt.screen == ScreenMode::fixed
                      ? opt.screen_keep
                      : auto_keep_count(J, block_len);
    const ScreeningReport report = screen_units(panel, d, opt.sirs);
    kept = report.kept;
    std::sort(kept.begin(), kept.end());
    screened = true;
  } else {
    kept.resize(J);
    for (int j = 0; j < J; ++j) kept[j] = j;
  }

  const PanelData working = screened ? subset_donors(panel, kept) : panel;
  const PanelData est_panel =
      working.covariates ? stack_covariates(working, opt.scaling) : working;

  const CenteredPanel cp = center_pretreatment(est_panel);
  const std::vector<MatchedControl> matched = match_all(cp);

  double sigma2 = 0.0;
  try {
    sigma2 = estimate_noise_variance(cp, opt.variance);
  } catch (const SmcError& e) {
    if (opt.variance == VarianceVariant::dof_adjusted &&
        e.code() == ErrorCode::RankDeficient) {
      sigma2 = estimate_noise_variance(cp, VarianceVariant::diag_residual);
      out.warnings.push_back(
          "donor block is rank deficient; noise estimate fell back to the "
          "diagonal-residual variant");
    } else {
      throw;
    }
  }

  const WeightSolution ws = solve_cp_weights(matched, cp, sigma2, opt);
  if (!ws.converged)
    out.warnings.push_back("weight solver stopped at the iteration cap");

  out.counterfactual = predict_counterfactual(ws.w, matched, cp, working);
  out.att = working.treated_path() - out.counterfactual;
  out.pre_rss = out.att.head(working.t0).squaredNorm();
  out.sigma2_hat = sigma2;

  out.unit_weight = Eigen::VectorXd::Zero(J);
  out.unit_theta = Eigen::VectorXd::Zero(J);
  for (size_t j = 0; j < kept.size(); ++j) {
    out.unit_weight[kept[j]] = ws.w[static_cast<int>(j)];
    out.unit_theta[kept[j]] = matched[j].theta;
  }
  out.comprehensive = out.unit_weight.cwiseProduct(out.unit_theta);

  double mean_shift = 0.0;
  for (size_t j = 0; j < kept.size(); ++j)
    mean_shift += ws.w[static_cast<int>(j)] * matched[j].theta * cp.donor_means[j];
  out.intercept = cp.y1_mean - mean_shift;

  if (screened) out.screened = kept;
  return out;
}

}  // namespace smc
