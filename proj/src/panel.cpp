#include "smc/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace smc {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, const std::string& where) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || cell.empty())
    fail(ErrorCode::MissingValue, "cannot parse '" + cell + "' at " + where);
  if (!std::isfinite(value))
    fail(ErrorCode::MissingValue, "non-finite value at " + where);
  return value;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MissingValue, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

void check_unique(const std::vector<std::string>& labels, const std::string& what) {
  std::unordered_set<std::string> seen;
  for (const auto& label : labels)
    if (!seen.insert(label).second)
      fail(ErrorCode::DuplicateUnit, "duplicate " + what + " '" + label + "'");
}

double sample_sd(const Eigen::VectorXd& x) {
  const auto n = x.size();
  if (n < 2) return 0.0;
  const double mean = x.mean();
  return std::sqrt((x.array() - mean).square().sum() / static_cast<double>(n - 1));
}

}  // namespace

std::vector<int> PanelData::donor_columns() const {
  std::vector<int> cols;
  cols.reserve(num_donors());
  for (int j = 0; j < num_units(); ++j)
    if (j != treated) cols.push_back(j);
  return cols;
}

void PanelData::validate() const {
  const int n = num_units();
  if (static_cast<int>(unit_labels.size()) != n)
    fail(ErrorCode::LengthMismatch, "unit labels do not match outcome columns");
  if (static_cast<int>(time_labels.size()) != T())
    fail(ErrorCode::LengthMismatch, "time labels do not match outcome rows");
  if (n < 2) fail(ErrorCode::EmptyDonorPool, "panel needs at least one donor unit");
  if (treated < 0 || treated >= n)
    fail(ErrorCode::UnknownUnit, "treated column index out of range");
  if (t0 < 1 || t0 >= T())
    fail(ErrorCode::InvalidSplit,
         "t0 must satisfy 1 <= t0 < T, got t0=" + std::to_string(t0) +
             " with T=" + std::to_string(T()));
  if (!outcomes.allFinite())
    fail(ErrorCode::MissingValue, "panel contains non-finite outcomes");
  check_unique(unit_labels, "unit label");
  if (covariates) {
    if (covariates->cols() != n)
      fail(ErrorCode::LengthMismatch, "covariate columns do not match units");
    if (static_cast<int>(covariate_labels.size()) != covariates->rows())
      fail(ErrorCode::LengthMismatch, "covariate labels do not match rows");
    if (!covariates->allFinite())
      fail(ErrorCode::MissingValue, "covariates contain non-finite values");
  }
}

PanelData load_panel_csv(const std::string& path, const std::string& treated_label,
                         int t0) {
  const auto lines = read_lines(path);
  if (lines.size() < 2) fail(ErrorCode::MissingValue, path + " has no data rows");

  const auto header = split_csv_line(lines[0]);
  if (header.size() < 2 || header[0] != "time")
    fail(ErrorCode::MissingValue, path + ": header must be 'time,<unit>,...'");

  PanelData panel;
  panel.unit_labels.assign(header.begin() + 1, header.end());
  check_unique(panel.unit_labels, "unit label");

  const int n = static_cast<int>(panel.unit_labels.size());
  const int T = static_cast<int>(lines.size()) - 1;
  panel.outcomes.resize(T, n);
  panel.time_labels.resize(T);
  for (int t = 0; t < T; ++t) {
    const auto cells = split_csv_line(lines[t + 1]);
    if (static_cast<int>(cells.size()) != n + 1)
      fail(ErrorCode::MissingValue,
           path + " row " + std::to_string(t + 2) + " has " +
               std::to_string(cells.size()) + " cells, expected " +
               std::to_string(n + 1));
    panel.time_labels[t] = cells[0];
    for (int j = 0; j < n; ++j)
      panel.outcomes(t, j) =
          parse_cell(cells[j + 1], path + " row " + std::to_string(t + 2) +
                                       " unit " + panel.unit_labels[j]);
  }

  const auto it = std::find(panel.unit_labels.begin(), panel.unit_labels.end(),
                            treated_label);
  if (it == panel.unit_labels.end())
    fail(ErrorCode::UnknownUnit, "treated unit '" + treated_label + "' not in " + path);
  panel.treated = static_cast<int>(it - panel.unit_labels.begin());
  panel.t0 = t0;
  panel.validate();
  return panel;
}

void write_panel_csv(const PanelData& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::MissingValue, "cannot write " + path);
  out << "time";
  for (const auto& label : panel.unit_labels) out << ',' << label;
  out << '\n';
  for (int t = 0; t < panel.T(); ++t) {
    out << panel.time_labels[t];
    for (int j = 0; j < panel.num_units(); ++j)
      out << ',' << to_g17(panel.outcomes(t, j));
    out << '\n';
  }
}

void load_covariates_csv(const std::string& path, PanelData& panel) {
  const auto lines = read_lines(path);
  if (lines.size() < 2) fail(ErrorCode::NoCovariates, path + " has no covariate rows");

  const auto header = split_csv_line(lines[0]);
  if (header.size() < 2 || header[0] != "covariate")
    fail(ErrorCode::MissingValue, path + ": header must be 'covariate,<unit>,...'");

  std::vector<std::string> file_units(header.begin() + 1, header.end());
  check_unique(file_units, "unit label");
  if (file_units.size() != panel.unit_labels.size())
    fail(ErrorCode::UnknownUnit, path + " units do not match the panel");

  // Map file columns onto panel column order.
  std::vector<int> where(panel.num_units());
  for (int j = 0; j < panel.num_units(); ++j) {
    const auto it = std::find(file_units.begin(), file_units.end(), panel.unit_labels[j]);
    if (it == file_units.end())
      fail(ErrorCode::UnknownUnit,
           "panel unit '" + panel.unit_labels[j] + "' missing from " + path);
    where[j] = static_cast<int>(it - file_units.begin());
  }

  const int p = static_cast<int>(lines.size()) - 1;
  Eigen::MatrixXd cov(p, panel.num_units());
  std::vector<std::string> names(p);
  for (int k = 0; k < p; ++k) {
    const auto cells = split_csv_line(lines[k + 1]);
    if (cells.size() != header.size())
      fail(ErrorCode::MissingValue,
           path + " row " + std::to_string(k + 2) + " has wrong cell count");
    names[k] = cells[0];
    for (int j = 0; j < panel.num_units(); ++j)
      cov(k, j) = parse_cell(cells[where[j] + 1],
                             path + " row " + std::to_string(k + 2));
  }
  check_unique(names, "covariate label");
  panel.covariates = std::move(cov);
  panel.covariate_labels = std::move(names);
  panel.validate();
}

Eigen::VectorXd load_v_weights_csv(const std::string& path, int t0) {
  const auto lines = read_lines(path);
  if (lines.empty() || trim(lines[0]) != "v")
    fail(ErrorCode::MissingValue, path + ": header must be 'v'");
  const int rows = static_cast<int>(lines.size()) - 1;
  if (rows != t0)
    fail(ErrorCode::LengthMismatch, path + " has " + std::to_string(rows) +
                                        " weights, expected t0=" + std::to_string(t0));
  Eigen::VectorXd v(rows);
  for (int t = 0; t < rows; ++t) {
    v[t] = parse_cell(trim(lines[t + 1]), path + " row " + std::to_string(t + 2));
    if (v[t] < 0.0)
      fail(ErrorCode::NegativeWeight,
           path + " row " + std::to_string(t + 2) + " is negative");
  }
  return v;
}

CenteredPanel center_pretreatment(const PanelData& panel) {
  panel.validate();
  const int t0 = panel.t0;
  const int J = panel.num_donors();

  CenteredPanel cp;
  cp.source = panel;
  const Eigen::VectorXd y1 = panel.outcomes.col(panel.treated).head(t0);
  cp.y1_mean = y1.mean();
  cp.y1c = y1.array() - cp.y1_mean;

  cp.y0c.resize(t0, J);
  cp.donor_means.resize(J);
  cp.degenerate.assign(J, 0);
  const auto donors = panel.donor_columns();
  for (int j = 0; j < J; ++j) {
    const Eigen::VectorXd yj = panel.outcomes.col(donors[j]).head(t0);
    cp.donor_means[j] = yj.mean();
    cp.y0c.col(j) = yj.array() - cp.donor_means[j];
    const double scale = std::max(1.0, yj.cwiseAbs().maxCoeff());
    if (cp.y0c.col(j).cwiseAbs().maxCoeff() <= 1e-12 * scale) cp.degenerate[j] = 1;
  }
  return cp;
}

PanelData stack_covariates(const PanelData& panel, CovariateScaling scaling) {
  panel.validate();
  if (!panel.covariates)
    fail(ErrorCode::NoCovariates, "panel has no covariates to stack");

  const Eigen::MatrixXd& cov = *panel.covariates;
  const int p = static_cast<int>(cov.rows());
  const int T = panel.T();
  const int t0 = panel.t0;

  Eigen::VectorXd row_scale = Eigen::VectorXd::Ones(p);
  if (scaling == CovariateScaling::match_outcome_variance) {
    double sy = 0.0;
    for (int t = 0; t < t0; ++t) sy += sample_sd(panel.outcomes.row(t).transpose());
    sy /= static_cast<double>(t0);
    for (int k = 0; k < p; ++k) {
      const double sk = sample_sd(cov.row(k).transpose());
      if (sk == 0.0)
        fail(ErrorCode::ZeroVarianceCovariate,
             "covariate '" + panel.covariate_labels[k] + "' is constant across units");
      row_scale[k] = sy / sk;
    }
  }

  PanelData stacked;
  stacked.outcomes.resize(T + p, panel.num_units());
  stacked.outcomes.topRows(t0) = panel.outcomes.topRows(t0);
  for (int k = 0; k < p; ++k)
    stacked.outcomes.row(t0 + k) = cov.row(k) * row_scale[k];
  stacked.outcomes.bottomRows(T - t0) = panel.outcomes.bottomRows(T - t0);

  stacked.unit_labels = panel.unit_labels;
  stacked.time_labels.reserve(T + p);
  for (int t = 0; t < t0; ++t) stacked.time_labels.push_back(panel.time_labels[t]);
  for (int k = 0; k < p; ++k)
    stacked.time_labels.push_back("cov:" + panel.covariate_labels[k]);
  for (int t = t0; t < T; ++t) stacked.time_labels.push_back(panel.time_labels[t]);
  stacked.treated = panel.treated;
  stacked.t0 = t0 + p;
  stacked.validate();
  return stacked;
}

PanelData apply_diag_weights(const PanelData& panel, const Eigen::VectorXd& v) {
  panel.validate();
  if (static_cast<int>(v.size()) != panel.t0)
    fail(ErrorCode::LengthMismatch, "v has " + std::to_string(v.size()) +
                                        " entries, expected t0=" +
                                        std::to_string(panel.t0));
  if (!v.allFinite()) fail(ErrorCode::MissingValue, "v contains non-finite entries");
  if ((v.array() < 0.0).any())
    fail(ErrorCode::NegativeWeight, "v contains negative entries");

  PanelData weighted = panel;
  for (int t = 0; t < panel.t0; ++t)
    weighted.outcomes.row(t) *= std::sqrt(v[t]);
  return weighted;
}

PanelData subset_donors(const PanelData& panel, const std::vector<int>& donor_positions) {
  panel.validate();
  const auto donors = panel.donor_columns();
  std::vector<std::uint8_t> keep(panel.num_units(), 0);
  keep[panel.treated] = 1;
  for (int pos : donor_positions) {
    if (pos < 0 || pos >= panel.num_donors())
      fail(ErrorCode::UnknownUnit, "donor position " + std::to_string(pos) + " out of range");
    keep[donors[pos]] = 1;
  }

  PanelData out;
  const int kept = static_cast<int>(std::count(keep.begin(), keep.end(), 1));
  out.outcomes.resize(panel.T(), kept);
  if (panel.covariates)
    out.covariates = Eigen::MatrixXd(panel.covariates->rows(), kept);
  int col = 0;
  for (int j = 0; j < panel.num_units(); ++j) {
    if (!keep[j]) continue;
    out.outcomes.col(col) = panel.outcomes.col(j);
    if (panel.covariates) out.covariates->col(col) = panel.covariates->col(j);
    out.unit_labels.push_back(panel.unit_labels[j]);
    if (j == panel.treated) out.treated = col;
    ++col;
  }
  out.time_labels = panel.time_labels;
  out.covariate_labels = panel.covariate_labels;
  out.t0 = panel.t0;
  out.validate();
  return out;
}

std::string to_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace smc
