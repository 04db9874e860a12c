#pragma once
// Panel containers, pre-period centering, covariate stacking and CSV I/O.
//
// A panel holds one outcome column per unit over T periods. Rows 0..t0-1 are
// the pre-treatment block that estimators fit on; rows t0..T-1 are only used
// for prediction. Wide CSV layout: header "time,<unit>,<unit>,...", one row
// per period. Covariate files use "covariate,<unit>,..." with one row per
// covariate. All numeric output is printed with 17 significant digits so a
// write/read cycle reproduces every double exactly.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smc/errors.hpp"

namespace smc {

enum class CovariateScaling { match_outcome_variance, none };

struct PanelData {
  Eigen::MatrixXd outcomes;              // T x (J+1), one column per unit
  std::vector<std::string> unit_labels;  // column order
  std::vector<std::string> time_labels;  // row order
  int treated = 0;                       // column index of the treated unit
  int t0 = 0;                            // number of pre-treatment periods

  std::optional<Eigen::MatrixXd> covariates;  // p x (J+1), columns as above
  std::vector<std::string> covariate_labels;

  int T() const { return static_cast<int>(outcomes.rows()); }
  int num_units() const { return static_cast<int>(outcomes.cols()); }
  int num_donors() const { return num_units() - 1; }

  // All column indices except the treated one, in original order.
  std::vector<int> donor_columns() const;

  Eigen::VectorXd treated_path() const { return outcomes.col(treated); }

  // Checks shape and label agreement, finiteness, and 0 < t0 < T.
  void validate() const;
};

// Pre-period block with per-unit means removed. Keeps a value copy of the
// panel it was derived from so downstream prediction has the original rows.
struct CenteredPanel {
  Eigen::VectorXd y1c;          // treated pre-period, mean removed
  Eigen::MatrixXd y0c;          // t0 x J donor block, per-unit means removed
  double y1_mean = 0.0;
  Eigen::VectorXd donor_means;  // length J, donor order
  // Donors whose pre-period path is constant; they carry no slope information
  // and are excluded from matching rather than dropped from the index space.
  std::vector<std::uint8_t> degenerate;
  PanelData source;

  int t0() const { return static_cast<int>(y1c.size()); }
  int num_donors() const { return static_cast<int>(y0c.cols()); }
};

PanelData load_panel_csv(const std::string& path, const std::string& treated_label,
                         int t0);
void write_panel_csv(const PanelData& panel, const std::string& path);

// Reads a covariate file and attaches its rows to the panel, reordering
// columns to the panel's unit order.
void load_covariates_csv(const std::string& path, PanelData& panel);

// Single column "v" with t0 nonnegative rows.
Eigen::VectorXd load_v_weights_csv(const std::string& path, int t0);

CenteredPanel center_pretreatment(const PanelData& panel);

// Returns a panel whose pre-period block is [outcome rows; covariate rows]
// stacked, with t0 grown accordingly and post-period rows unchanged. Under
// match_outcome_variance each covariate row is rescaled by s_y / s_k where
// s_k is the cross-unit sd of that covariate (treated included) and s_y the
// average cross-unit sd of the pre-period outcome rows.
PanelData stack_covariates(const PanelData& panel, CovariateScaling scaling);

// Multiplies pre-period row t of every outcome column by sqrt(v[t]). Fitting
// on the weighted panel turns every pre-period least squares objective into
// its diagonally weighted version.
PanelData apply_diag_weights(const PanelData& panel, const Eigen::VectorXd& v);

// Keeps the treated unit plus the donors at the given positions (0-based,
// donor order). Column order of the surviving units is preserved.
PanelData subset_donors(const PanelData& panel, const std::vector<int>& donor_positions);

// printf "%.17g", the round-trip format used by every CSV writer here.
std::string to_g17(double x);

}  // namespace smc
