#pragma once

#include "landmix/geo_grid.hpp"
#include "landmix/mixreg.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace landmix {

inline constexpr double kDefaultVifThreshold = 5.0;

struct VifEntry {
  std::string name;
  double vif = 1.0;
  double inv_vif = 1.0;
  bool flagged = false;               // vif > threshold
  bool perfect_collinearity = false;  // R_j^2 == 1; vif is +inf
};

struct VifReport {
  std::vector<VifEntry> entries;
  double mean_vif = 1.0;
  double threshold = kDefaultVifThreshold;
};

// Regresses each column on all others plus an intercept; vif = 1/(1 - R^2).
// X must not contain an intercept column. Throws ConstantColumn.
VifReport vif(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
              double threshold = kDefaultVifThreshold);
// Drops the dataset's intercept column first.
VifReport vif(const Dataset& data, double threshold = kDefaultVifThreshold);

struct SummaryStats {
  double mean = 0.0;
  double sd = 0.0;  // sample SD, 0 for a single observation
  double min = 0.0;
  double max = 0.0;
};

SummaryStats summarize(std::span<const double> values);

struct ComponentDescriptives {
  int component = 0;  // 0-based label in the fit
  std::size_t n = 0;
  std::vector<std::string> variables;
  std::vector<SummaryStats> stats;
};

struct ClusterDescriptives {
  std::vector<ComponentDescriptives> components;  // descending n, ties by label
  std::size_t total = 0;
};

// Land price, the nine SOC z-scores, population and the four rates, per
// hard label. Labels run 0..K-1 over the dataset rows. Throws LabelMismatch.
ClusterDescriptives cluster_descriptives(const StudyArea& area, const Dataset& data, std::span<const int> labels,
                                         int K);

// Two-sided normal-approximation p-value for a coefficient / SE ratio.
double two_sided_p(double z);
// "***" below .001, "**" below .01, "*" below .05, else empty.
std::string significance_stars(double p_value);

struct CoefficientCell {
  double b = 0.0;
  double se = 0.0;
  double p = 1.0;
  std::string stars;
};

struct CoefficientTable {
  std::vector<std::string> rows;     // predictors in design order, then "constant"
  std::vector<std::string> columns;  // "total", "group_1", ...
  std::vector<std::vector<CoefficientCell>> cells;  // [column][row]
  std::vector<double> mixing_weights;                // a_k per group
  std::vector<double> hard_shares;                   // label count / n per group
  std::vector<std::size_t> group_sizes;
  std::size_t n = 0;
  double f_statistic = 0.0;
  double f_p_value = 1.0;
  double r_squared = 0.0;
};

CoefficientTable coefficient_table(const MixtureFit& fit, const OlsResult& pooled, const Dataset& data);

std::string vif_to_csv(const VifReport& report);
std::string descriptives_to_csv(const ClusterDescriptives& d);
std::string coefficients_to_csv(const CoefficientTable& t);

}  // namespace landmix
