#pragma once
// Donor screening for wide panels, in the style of sure independence
// screening on the raw pre-period outcomes. Each donor gets a nonnegative
// relevance statistic; when the pool is too wide for the matching step only
// the top-d donors are kept.
//
// With F1(s) = (1/t0) * #{l <= t0 : Y_1l < s}, the two statistics are
//   pointwise: eta_j = (1/t0) sum_t [ Y_jt * F1(Y_1t) ]^2
//   standard:  eta_j = (1/t0) sum_t [ (1/t0) sum_l Y_jl * 1{Y_1l < Y_1t} ]^2
// The pointwise form keeps the donor's value at the outer period inside the
// inner average and is the default; the standard form averages the donor over
// the inner periods (the classical marginal statistic).

#include <Eigen/Dense>

#include <vector>

#include "smc/panel.hpp"

namespace smc {

enum class SirsVariant { pointwise, standard };

struct ScreeningReport {
  Eigen::VectorXd eta;     // one statistic per donor, donor order
  std::vector<int> kept;   // donor indices, ranked by eta descending
  int d = 0;
  SirsVariant variant = SirsVariant::pointwise;
};

Eigen::VectorXd sirs_statistics(const PanelData& panel, SirsVariant variant);

// Keeps the d largest-eta donors; ties break toward the lower donor index.
ScreeningReport screen_units(const PanelData& panel, int d, SirsVariant variant);

// Default keep count: min(J, floor(block_len / ln(block_len)), block_len - 2),
// clamped to at least one donor. block_len is the pre-period length the
// downstream fit will see.
int auto_keep_count(int num_donors, int block_len);

}  // namespace smc
