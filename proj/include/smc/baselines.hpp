#pragma once
// Reference estimators fitted on the same panels: classic synthetic control
// (simplex weights on raw outcomes, no intercept), demeaned synthetic control
// (simplex weights after pre-period centering, intercept restored), and plain
// least squares with an intercept (minimum-norm under rank deficiency).

#include "smc/estimator.hpp"
#include "smc/panel.hpp"

namespace smc {

struct BaselineOptions {
  double qp_tol = 1e-8;
  int qp_max_iter = 100000;
};

EstimatorOutput fit_sc(const PanelData& panel, const BaselineOptions& opt = {});
EstimatorOutput fit_dsc(const PanelData& panel, const BaselineOptions& opt = {});
EstimatorOutput fit_ols(const PanelData& panel);

}  // namespace smc
