#include "smc/screening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace smc {

Eigen::VectorXd sirs_statistics(const PanelData& panel, SirsVariant variant) {
  panel.validate();
  const int t0 = panel.t0;
  const int J = panel.num_donors();
  const auto donors = panel.donor_columns();
  const Eigen::VectorXd y1 = panel.outcomes.col(panel.treated).head(t0);
  const double inv_t0 = 1.0 / static_cast<double>(t0);

  // F1(Y_1t), the fraction of pre-periods strictly below period t's value.
  Eigen::VectorXd cdf(t0);
  for (int t = 0; t < t0; ++t) {
    int below = 0;
    for (int l = 0; l < t0; ++l)
      if (y1[l] < y1[t]) ++below;
    cdf[t] = inv_t0 * static_cast<double>(below);
  }

  Eigen::VectorXd eta(J);
  for (int j = 0; j < J; ++j) {
    const Eigen::VectorXd yj = panel.outcomes.col(donors[j]).head(t0);
    double acc = 0.0;
    for (int t = 0; t < t0; ++t) {
      double inner;
      if (variant == SirsVariant::pointwise) {
        inner = yj[t] * cdf[t];
      } else {
        inner = 0.0;
        for (int l = 0; l < t0; ++l)
          if (y1[l] < y1[t]) inner += yj[l];
        inner *= inv_t0;
      }
      acc += inner * inner;
    }
    eta[j] = inv_t0 * acc;
  }
  return eta;
}

ScreeningReport screen_units(const PanelData& panel, int d, SirsVariant variant) {
  const int J = panel.num_donors();
  if (d < 1 || d > J)
    fail(ErrorCode::InvalidKeepCount,
         "keep count " + std::to_string(d) + " outside [1, " + std::to_string(J) + "]");

  ScreeningReport report;
  report.variant = variant;
  report.d = d;
  report.eta = sirs_statistics(panel, variant);

  std::vector<int> order(J);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (report.eta[a] != report.eta[b]) return report.eta[a] > report.eta[b];
    return a < b;
  });
  report.kept.assign(order.begin(), order.begin() + d);
  return report;
}

int auto_keep_count(int num_donors, int block_len) {
  const double len = static_cast<double>(std::max(block_len, 2));
  const int by_len = static_cast<int>(std::floor(len / std::log(len)));
  const int keep = std::min({num_donors, by_len, block_len - 2});
  return std::max(1, keep);
}

}  // namespace smc
