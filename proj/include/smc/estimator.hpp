#pragma once
// Synthetic matching control: combine the per-donor matching fits with donor
// weights chosen by a Mallows-style criterion
//
//     C(w) = || y1c - sum_j w_j theta_j yjc ||^2  +  2 sigma2 sum_j w_j
//
// minimized over the box w in [0,1]^J, then carry the fitted combination out
// of sample:  Yhat_1t(0) = ybar_1 + sum_j w_j theta_j (Y_jt - ybar_j).

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "smc/matching.hpp"
#include "smc/optim.hpp"
#include "smc/panel.hpp"
#include "smc/screening.hpp"

namespace smc {

// Two published forms of the pre-period noise estimate. dof_adjusted regresses
// the treated path on all usable donors jointly and divides the residual sum
// of squares by (t0 - J); diag_residual sums the per-donor univariate fits and
// keeps the unnormalized residual.
enum class VarianceVariant { dof_adjusted, diag_residual };

enum class ScreenMode { automatic, off, fixed };

struct SmcOptions {
  VarianceVariant variance = VarianceVariant::dof_adjusted;
  ScreenMode screen = ScreenMode::automatic;
  int screen_keep = 0;  // only read when screen == fixed
  SirsVariant sirs = SirsVariant::pointwise;
  CovariateScaling scaling = CovariateScaling::match_outcome_variance;
  double qp_tol = 1e-8;
  int qp_max_iter = 100000;
};

struct WeightSolution {
  Eigen::VectorXd w;
  double sigma2_hat = 0.0;
  double criterion = 0.0;  // C(w) evaluated directly at the returned weights
  int iterations = 0;
  bool converged = false;
};

// The common result shape produced by every estimator here (smc and the
// reference methods). Vectors indexed by donor refer to the donor order of
// the input panel; donors removed by screening keep slots with zero weight.
struct EstimatorOutput {
  std::string method;
  Eigen::VectorXd counterfactual;  // length T
  Eigen::VectorXd att;             // observed treated path minus counterfactual
  Eigen::VectorXd unit_weight;     // solver weight / simplex weight / coefficient
  Eigen::VectorXd unit_theta;      // matching slopes (1 for the reference methods)
  Eigen::VectorXd comprehensive;   // elementwise unit_weight * unit_theta
  double intercept = 0.0;
  double pre_rss = 0.0;
  std::optional<double> sigma2_hat;          // smc only
  std::optional<double> post_mspe;           // filled when truth is known
  std::optional<std::vector<int>> screened;  // kept donor positions, ascending
  std::vector<std::string> warnings;
};

double estimate_noise_variance(const CenteredPanel& cp, VarianceVariant variant);

double cp_criterion(const Eigen::VectorXd& w, const std::vector<MatchedControl>& matched,
                    const CenteredPanel& cp, double sigma2);

// C(w) written as w'Qw - 2 lin'w + const_term, ready for the box solver.
QuadraticProgram cp_quadratic_program(const std::vector<MatchedControl>& matched,
                                      const CenteredPanel& cp, double sigma2);

WeightSolution solve_cp_weights(const std::vector<MatchedControl>& matched,
                                const CenteredPanel& cp, double sigma2,
                                const SmcOptions& opt = {});

// Counterfactual path over every row of outcome_panel, using the centering
// means stored in cp. outcome_panel must have the same donors in the same
// order as cp (it is cp.source in the plain flow; with stacked covariates it
// is the unstacked panel so prediction sees outcome rows only).
Eigen::VectorXd predict_counterfactual(const Eigen::VectorXd& w,
                                       const std::vector<MatchedControl>& matched,
                                       const CenteredPanel& cp,
                                       const PanelData& outcome_panel);

// Full pipeline: optional screening, optional covariate stacking, centering,
// matching, noise estimate, weight selection, prediction.
EstimatorOutput fit_smc(const PanelData& panel, const SmcOptions& opt = {});

}  // namespace smc
