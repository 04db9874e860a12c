#pragma once
// Per-donor matching step: regress the treated unit's centered pre-period
// path on each donor's centered path, one donor at a time. The slope on
// centered data is identical to the slope of the raw two-parameter fit
// y1 ~ b + theta * yj, and the intercept reported here is that fit's b.

#include <Eigen/Dense>

#include <vector>

#include "smc/panel.hpp"

namespace smc {

struct MatchedControl {
  int unit = 0;                 // donor position (0-based, donor order)
  double theta = 0.0;           // slope of the univariate fit
  double intercept = 0.0;       // ybar_1 - theta * ybar_j
  Eigen::VectorXd fitted_pre;   // theta * yjc, zero when excluded
  Eigen::VectorXd residual_pre; // y1c - fitted_pre
  bool excluded = false;        // degenerate donor, frozen out of the fit
};

MatchedControl match_unit(const CenteredPanel& cp, int donor_index);

// Fits every donor. Throws AllUnitsDegenerate when nothing can be matched.
std::vector<MatchedControl> match_all(const CenteredPanel& cp);

}  // namespace smc
