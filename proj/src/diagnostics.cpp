#include "landmix/diagnostics.hpp"

#include "landmix/errors.hpp"
#include "landmix/text_io.hpp"

#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace landmix {

namespace {

constexpr double kPerfectFitTolerance = 1e-12;

}  // namespace

VifReport vif(const Eigen::MatrixXd& X, const std::vector<std::string>& names, double threshold) {
  const Eigen::Index n = X.rows();
  const Eigen::Index m = X.cols();
  if (m < 2) throw InputError("vif needs at least two predictors");
  if (static_cast<Eigen::Index>(names.size()) != m) throw DimensionMismatch("vif names vs columns");

  VifReport report;
  report.threshold = threshold;
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::VectorXd target = X.col(j);
    const double tss = (target.array() - target.mean()).square().sum();
    if (!(tss > 0.0)) throw ConstantColumn(names[static_cast<std::size_t>(j)]);

    Eigen::MatrixXd others(n, m);
    others.col(0).setOnes();
    for (Eigen::Index c = 0, dst = 1; c < m; ++c) {
      if (c != j) others.col(dst++) = X.col(c);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(others);
    const Eigen::VectorXd coef = qr.solve(target);
    const double rss = (target - others * coef).squaredNorm();
    const double one_minus_r2 = rss / tss;

    VifEntry e;
    e.name = names[static_cast<std::size_t>(j)];
    if (one_minus_r2 <= kPerfectFitTolerance) {
      e.perfect_collinearity = true;
      e.vif = std::numeric_limits<double>::infinity();
      e.inv_vif = 0.0;
    } else {
      e.vif = 1.0 / one_minus_r2;
      e.inv_vif = one_minus_r2;
    }
    e.flagged = e.vif > threshold;
    report.entries.push_back(std::move(e));
  }
  double sum = 0.0;
  for (const auto& e : report.entries) sum += e.vif;
  report.mean_vif = sum / static_cast<double>(report.entries.size());
  return report;
}

VifReport vif(const Dataset& data, double threshold) {
  const Eigen::MatrixXd X = data.X.rightCols(data.X.cols() - 1);
  const std::vector<std::string> names(data.columns.begin() + 1, data.columns.end());
  return vif(X, names, threshold);
}

SummaryStats summarize(std::span<const double> values) {
  SummaryStats s;
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan};
  }
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

ClusterDescriptives cluster_descriptives(const StudyArea& area, const Dataset& data, std::span<const int> labels,
                                         int K) {
  if (K < 1) throw LabelMismatch("K must be at least 1");
  if (static_cast<Eigen::Index>(labels.size()) != data.n()) {
    throw LabelMismatch(std::to_string(labels.size()) + " labels for " + std::to_string(data.n()) + " rows");
  }
  std::unordered_map<std::string, const GridCell*> by_id;
  for (const GridCell& c : area.cells) by_id.emplace(c.id, &c);

  std::vector<std::string> variables{"land_price"};
  for (FacilityKind k : kAllFacilityKinds) variables.emplace_back(to_string(k));
  for (const char* v : {"population", "female_rate", "public_land_rate", "green_rate", "commercial_rate"}) {
    variables.emplace_back(v);
  }

  // values[k][variable] -> observations
  std::vector<std::vector<std::vector<double>>> values(
      static_cast<std::size_t>(K), std::vector<std::vector<double>>(variables.size()));
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= K) throw LabelMismatch("label " + std::to_string(label) + " outside 0.." + std::to_string(K - 1));
    const auto it = by_id.find(data.cell_ids[static_cast<std::size_t>(i)]);
    if (it == by_id.end()) throw LabelMismatch("cell '" + data.cell_ids[static_cast<std::size_t>(i)] + "' not in area");
    const GridCell& c = *it->second;
    auto& bucket = values[static_cast<std::size_t>(label)];
    std::size_t v = 0;
    bucket[v++].push_back(c.land_price);
    for (std::size_t s = 0; s < kFacilityKindCount; ++s) bucket[v++].push_back(data.X(i, static_cast<Eigen::Index>(1 + s)));
    for (double x : {c.population, c.female_rate, c.public_land_rate, c.green_rate, c.commercial_rate}) {
      bucket[v++].push_back(x);
    }
  }

  ClusterDescriptives out;
  out.total = labels.size();
  for (int k = 0; k < K; ++k) {
    ComponentDescriptives cd;
    cd.component = k;
    cd.n = values[static_cast<std::size_t>(k)][0].size();
    cd.variables = variables;
    for (const auto& obs : values[static_cast<std::size_t>(k)]) cd.stats.push_back(summarize(obs));
    out.components.push_back(std::move(cd));
  }
  std::stable_sort(out.components.begin(), out.components.end(),
                   [](const ComponentDescriptives& a, const ComponentDescriptives& b) { return a.n > b.n; });
  return out;
}

double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

std::string significance_stars(double p_value) {
  if (p_value < 0.001) return "***";
  if (p_value < 0.01) return "**";
  if (p_value < 0.05) return "*";
  return "";
}

namespace {

CoefficientCell make_cell(double b, double se) {
  CoefficientCell c;
  c.b = b;
  c.se = se;
  c.p = se > 0.0 ? two_sided_p(b / se) : (b == 0.0 ? 1.0 : 0.0);
  c.stars = significance_stars(c.p);
  return c;
}

// Predictors first, intercept last.
std::vector<Eigen::Index> report_order(Eigen::Index cols) {
  std::vector<Eigen::Index> order;
  for (Eigen::Index j = 1; j < cols; ++j) order.push_back(j);
  order.push_back(0);
  return order;
}

}  // namespace

CoefficientTable coefficient_table(const MixtureFit& fit, const OlsResult& pooled, const Dataset& data) {
  const Eigen::MatrixXd comp_se = component_std_errors(fit, data);
  const auto order = report_order(data.X.cols());

  CoefficientTable t;
  t.n = static_cast<std::size_t>(data.n());
  for (Eigen::Index j : order) t.rows.push_back(j == 0 ? "constant" : data.columns[static_cast<std::size_t>(j)]);

  t.columns.push_back("total");
  std::vector<CoefficientCell> total;
  for (Eigen::Index j : order) total.push_back(make_cell(pooled.coefficients[j], pooled.std_errors[j]));
  t.cells.push_back(std::move(total));

  std::vector<std::size_t> counts(static_cast<std::size_t>(fit.K()), 0);
  for (int l : fit.labels) ++counts[static_cast<std::size_t>(l)];
  for (int k = 0; k < fit.K(); ++k) {
    t.columns.push_back("group_" + std::to_string(k + 1));
    std::vector<CoefficientCell> col;
    for (Eigen::Index j : order) col.push_back(make_cell(fit.params.betas(j, k), comp_se(j, k)));
    t.cells.push_back(std::move(col));
    t.mixing_weights.push_back(fit.params.weights[k]);
    t.group_sizes.push_back(counts[static_cast<std::size_t>(k)]);
    t.hard_shares.push_back(static_cast<double>(counts[static_cast<std::size_t>(k)]) / static_cast<double>(t.n));
  }

  t.f_statistic = pooled.f_statistic;
  t.r_squared = pooled.r_squared;
  if (pooled.df_model > 0 && pooled.df_resid > 0 && std::isfinite(pooled.f_statistic)) {
    boost::math::fisher_f dist(pooled.df_model, pooled.df_resid);
    t.f_p_value = boost::math::cdf(boost::math::complement(dist, std::max(0.0, pooled.f_statistic)));
  }
  return t;
}

std::string vif_to_csv(const VifReport& report) {
  std::string out = "variable,vif,inv_vif,flagged\n";
  for (const auto& e : report.entries) {
    out += e.name + ',' + (e.perfect_collinearity ? "inf" : format_double(e.vif)) + ',' + format_double(e.inv_vif) +
           ',' + (e.flagged ? "1" : "0") + '\n';
  }
  out += "mean," + format_double(report.mean_vif) + ',' +
         (std::isfinite(report.mean_vif) ? format_double(1.0 / report.mean_vif) : std::string("0")) + ",\n";
  return out;
}

std::string descriptives_to_csv(const ClusterDescriptives& d) {
  std::string out = "group,component,n,variable,mean,sd,min,max\n";
  for (std::size_t g = 0; g < d.components.size(); ++g) {
    const auto& c = d.components[g];
    for (std::size_t v = 0; v < c.variables.size(); ++v) {
      const auto& s = c.stats[v];
      out += std::to_string(g + 1) + ',' + std::to_string(c.component + 1) + ',' + std::to_string(c.n) + ',' +
             c.variables[v] + ',' + format_double(s.mean) + ',' + format_double(s.sd) + ',' + format_double(s.min) +
             ',' + format_double(s.max) + '\n';
    }
  }
  return out;
}

std::string coefficients_to_csv(const CoefficientTable& t) {
  std::string out = "variable";
  for (const auto& c : t.columns) out += ',' + c + "_b," + c + "_se," + c + "_p," + c + "_stars";
  out += '\n';
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out += t.rows[r];
    for (const auto& col : t.cells) {
      const auto& cell = col[r];
      out += ',' + format_double(cell.b) + ',' + format_double(cell.se) + ',' + format_double(cell.p) + ',' + cell.stars;
    }
    out += '\n';
  }
  // Summary rows fill only the _b slot of the relevant columns.
  auto summary_row = [&](const std::string& name, const std::vector<std::string>& total_and_groups) {
    out += name;
    for (const auto& v : total_and_groups) out += ',' + v + ",,,";
    out += '\n';
  };
  std::vector<std::string> weights{""}, shares{""}, sizes{std::to_string(t.n)};
  for (std::size_t k = 0; k < t.mixing_weights.size(); ++k) {
    weights.push_back(format_double(t.mixing_weights[k]));
    shares.push_back(format_double(t.hard_shares[k]));
    sizes.push_back(std::to_string(t.group_sizes[k]));
  }
  summary_row("n", sizes);
  summary_row("mixing_weight", weights);
  summary_row("hard_share", shares);
  std::vector<std::string> f_row(t.columns.size()), r2_row(t.columns.size());
  f_row[0] = format_double(t.f_statistic);
  r2_row[0] = format_double(t.r_squared);
  summary_row("f_statistic", f_row);
  std::vector<std::string> fp_row(t.columns.size());
  fp_row[0] = format_double(t.f_p_value);
  summary_row("f_p_value", fp_row);
  summary_row("r_squared", r2_row);
  return out;
}

}  // namespace landmix
