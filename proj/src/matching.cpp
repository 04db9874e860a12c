#include "smc/matching.hpp"

namespace smc {

MatchedControl match_unit(const CenteredPanel& cp, int donor_index) {
  if (donor_index < 0 || donor_index >= cp.num_donors())
    fail(ErrorCode::UnknownUnit,
         "donor index " + std::to_string(donor_index) + " out of range");

  MatchedControl m;
  m.unit = donor_index;
  if (cp.degenerate[donor_index]) {
    m.excluded = true;
    m.theta = 0.0;
    m.intercept = cp.y1_mean;
    m.fitted_pre = Eigen::VectorXd::Zero(cp.t0());
    m.residual_pre = cp.y1c;
    return m;
  }

  const auto yjc = cp.y0c.col(donor_index);
  m.theta = yjc.dot(cp.y1c) / yjc.dot(yjc);
  m.intercept = cp.y1_mean - m.theta * cp.donor_means[donor_index];
  m.fitted_pre = m.theta * yjc;
  m.residual_pre = cp.y1c - m.fitted_pre;
  return m;
}

std::vector<MatchedControl> match_all(const CenteredPanel& cp) {
  const int J = cp.num_donors();
  if (J == 0) fail(ErrorCode::EmptyDonorPool, "no donors to match");

  std::vector<MatchedControl> matched;
  matched.reserve(J);
  bool any_usable = false;
  for (int j = 0; j < J; ++j) {
    matched.push_back(match_unit(cp, j));
    any_usable = any_usable || !matched.back().excluded;
  }
  if (!any_usable)
    fail(ErrorCode::AllUnitsDegenerate, "every donor is constant over the pre-period");
  return matched;
}

}  // namespace smc
