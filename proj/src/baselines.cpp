#include "smc/baselines.hpp"

namespace smc {

namespace {

// Donor pre-period block and full-period block as dense matrices.
struct DonorBlocks {
  Eigen::MatrixXd pre;   // t0 x J
  Eigen::MatrixXd full;  // T x J
};

DonorBlocks donor_blocks(const PanelData& panel) {
  const auto donors = panel.donor_columns();
  DonorBlocks blocks;
  blocks.full.resize(panel.T(), panel.num_donors());
  for (int j = 0; j < panel.num_donors(); ++j)
    blocks.full.col(j) = panel.outcomes.col(donors[j]);
  blocks.pre = blocks.full.topRows(panel.t0);
  return blocks;
}

void finish_output(EstimatorOutput& out, const PanelData& panel) {
  out.att = panel.treated_path() - out.counterfactual;
  out.pre_rss = out.att.head(panel.t0).squaredNorm();
}

}  // namespace

EstimatorOutput fit_sc(const PanelData& panel, const BaselineOptions& opt) {
  panel.validate();
  const auto blocks = donor_blocks(panel);
  const Eigen::VectorXd y1 = panel.treated_path().head(panel.t0);

  QuadraticProgram qp;
  qp.q = blocks.pre.transpose() * blocks.pre;
  qp.lin = blocks.pre.transpose() * y1;
  qp.const_term = y1.squaredNorm();

  QpOptions qo;
  qo.tol = opt.qp_tol;
  qo.max_iter = opt.qp_max_iter;
  const QpSolution qs = solve_simplex_qp(qp, qo);

  EstimatorOutput out;
  out.method = "sc";
  out.unit_weight = qs.w;
  out.unit_theta = Eigen::VectorXd::Ones(panel.num_donors());
  out.comprehensive = qs.w;
  out.intercept = 0.0;
  out.counterfactual = blocks.full * qs.w;
  if (!qs.converged)
    out.warnings.push_back("weight solver stopped at the iteration cap");
  finish_output(out, panel);
  return out;
}

EstimatorOutput fit_dsc(const PanelData& panel, const BaselineOptions& opt) {
  panel.validate();
  const CenteredPanel cp = center_pretreatment(panel);
  const auto blocks = donor_blocks(panel);

  QuadraticProgram qp;
  qp.q = cp.y0c.transpose() * cp.y0c;
  qp.lin = cp.y0c.transpose() * cp.y1c;
  qp.const_term = cp.y1c.squaredNorm();

  QpOptions qo;
  qo.tol = opt.qp_tol;
  qo.max_iter = opt.qp_max_iter;
  const QpSolution qs = solve_simplex_qp(qp, qo);

  EstimatorOutput out;
  out.method = "dsc";
  out.unit_weight = qs.w;
  out.unit_theta = Eigen::VectorXd::Ones(panel.num_donors());
  out.comprehensive = qs.w;
  out.intercept = cp.y1_mean - qs.w.dot(cp.donor_means);
  out.counterfactual =
      (blocks.full * qs.w).array() + out.intercept;
  if (!qs.converged)
    out.warnings.push_back("weight solver stopped at the iteration cap");
  finish_output(out, panel);
  return out;
}

EstimatorOutput fit_ols(const PanelData& panel) {
  panel.validate();
  const auto blocks = donor_blocks(panel);
  const int t0 = panel.t0;
  const int J = panel.num_donors();

  Eigen::MatrixXd x(t0, J + 1);
  x.col(0).setOnes();
  x.rightCols(J) = blocks.pre;

  // Minimum-norm least squares keeps the fit defined when donors outnumber
  // pre-periods or columns repeat.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
  const Eigen::VectorXd beta = cod.solve(panel.treated_path().head(t0));

  EstimatorOutput out;
  out.method = "ols";
  out.intercept = beta[0];
  out.unit_weight = beta.tail(J);
  out.unit_theta = Eigen::VectorXd::Ones(J);
  out.comprehensive = out.unit_weight;
  out.counterfactual = (blocks.full * out.unit_weight).array() + out.intercept;
  finish_output(out, panel);
  return out;
}

}  // namespace smc
