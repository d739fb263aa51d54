#include "fixtures.hpp"
#include "landmix/diagnostics.hpp"
#include "landmix/errors.hpp"
#include "landmix/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace landmix;

namespace {

// Centred, mutually orthogonal +-1 columns (Walsh functions).
Eigen::MatrixXd walsh(Eigen::Index n, int cols) {
  Eigen::MatrixXd X(n, cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < cols; ++j) X(i, j) = ((i >> j) & 1) ? 1.0 : -1.0;
  }
  return X;
}

std::vector<std::string> names(int cols) {
  std::vector<std::string> out;
  for (int j = 0; j < cols; ++j) out.push_back("v" + std::to_string(j));
  return out;
}

}  // namespace

TEST_CASE("vif: orthogonal design gives exactly one everywhere") {
  const VifReport r = vif(walsh(64, 5), names(5));
  for (const auto& e : r.entries) {
    CHECK(e.vif == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_FALSE(e.flagged);
  }
  CHECK(r.mean_vif == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("vif: a pair with correlation 0.6 gives 1.5625") {
  Eigen::MatrixXd X = walsh(64, 4);
  X.col(1) = 0.6 * X.col(0) + 0.8 * X.col(1);
  const VifReport r = vif(X, names(4));
  CHECK(r.entries[0].vif == doctest::Approx(1.5625).epsilon(1e-12));
  CHECK(r.entries[1].vif == doctest::Approx(1.5625).epsilon(1e-12));
  CHECK(r.entries[2].vif == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("vif: duplicated column is flagged as perfectly collinear") {
  Eigen::MatrixXd X = fixtures::random_linear(50, 3, 1).X.rightCols(3);
  X.col(2) = X.col(0);
  const VifReport r = vif(X, names(3));
  CHECK(r.entries[0].perfect_collinearity);
  CHECK(r.entries[2].perfect_collinearity);
  CHECK(std::isinf(r.entries[0].vif));
  CHECK(r.entries[0].inv_vif == 0.0);
  CHECK(r.entries[0].flagged);
}

TEST_CASE("vif: constant column is an error; rescaling columns changes nothing") {
  Eigen::MatrixXd X = fixtures::random_linear(80, 4, 2).X.rightCols(4);
  const VifReport base = vif(X, names(4));
  Eigen::MatrixXd scaled = X;
  scaled.col(1) *= -37.5;
  scaled.col(3) *= 1e-3;
  const VifReport r = vif(scaled, names(4));
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(r.entries[j].vif == doctest::Approx(base.entries[j].vif).epsilon(1e-10));
    CHECK(r.entries[j].inv_vif == doctest::Approx(1.0 / r.entries[j].vif).epsilon(1e-12));
    CHECK(r.entries[j].vif >= 1.0);
  }
  X.col(2).setConstant(3.0);
  CHECK_THROWS_AS(vif(X, names(4)), ConstantColumn);
}

TEST_CASE("vif matches brute-force auxiliary regressions and flags above the threshold") {
  auto rng = make_engine(3, "vif");
  std::normal_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd X(200, 5);
  for (Eigen::Index i = 0; i < 200; ++i) {
    const double z = unit(rng);
    for (int j = 0; j < 5; ++j) X(i, j) = unit(rng) + (j < 3 ? 1.8 * z : 0.0);
  }
  const VifReport r = vif(X, names(5));
  const auto rows = fixtures::to_rows(X);
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(r.entries[j].vif == doctest::Approx(oracle::vif(rows, j)).epsilon(1e-8));
    CHECK(r.entries[j].flagged == (r.entries[j].vif > 5.0));
  }
  const VifReport loose = vif(X, names(5), 100.0);
  for (const auto& e : loose.entries) CHECK_FALSE(e.flagged);
}

TEST_CASE("dataset vif drops the intercept") {
  const Dataset d = fixtures::random_linear(90, 4, 4);
  const VifReport r = vif(d);
  REQUIRE(r.entries.size() == 4);
  CHECK(r.entries[0].name == "x1");
}

TEST_CASE("significance stars follow the three thresholds") {
  CHECK(significance_stars(0.03) == "*");
  CHECK(significance_stars(0.2) == "");
  CHECK(significance_stars(0.05) == "");
  CHECK(significance_stars(0.0099) == "**");
  CHECK(significance_stars(0.01) == "*");
  CHECK(significance_stars(0.00099) == "***");
  CHECK(significance_stars(0.001) == "**");
  CHECK(two_sided_p(0.0) == doctest::Approx(1.0));
  CHECK(two_sided_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(two_sided_p(-1.959963984540054) == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("summary statistics use the sample standard deviation") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const SummaryStats s = summarize(v);
  CHECK(s.mean == 2.5);
  CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(s.min == 1.0);
  CHECK(s.max == 4.0);
  CHECK(summarize(std::vector<double>{7.0}).sd == 0.0);
}

TEST_CASE("cluster descriptives: partition sizes, single group, ordering and mismatch") {
  SynthSpec spec;
  spec.seed = 5;
  spec.n_cells = 300;
  spec.planted = planted_params(2, 8.0, 0.05, 0.01, spec.seed);
  const SynthArea s = synth_generate(spec);
  const Dataset d = build_design(s.area, standardize(grade_all(s.area, GradeTable::defaults())));

  const std::vector<int> zeros(static_cast<std::size_t>(d.n()), 0);
  const ClusterDescriptives all = cluster_descriptives(s.area, d, zeros, 1);
  REQUIRE(all.components.size() == 1);
  CHECK(all.components[0].n == 300);
  const auto& stats = all.components[0].stats;
  const auto& vars = all.components[0].variables;
  CHECK(vars.front() == "land_price");
  for (std::size_t v = 0; v < vars.size(); ++v) {
    if (vars[v] == "kindergarten") CHECK(std::abs(stats[v].mean) < 1e-10);
  }

  std::vector<int> split(static_cast<std::size_t>(d.n()));
  for (std::size_t i = 0; i < split.size(); ++i) split[i] = i % 3 == 0 ? 0 : 1;
  const ClusterDescriptives two = cluster_descriptives(s.area, d, split, 2);
  CHECK(two.components[0].component == 1);
  CHECK(two.components[0].n + two.components[1].n == 300);

  std::vector<int> halves(static_cast<std::size_t>(d.n()));
  for (std::size_t i = 0; i < halves.size(); ++i) halves[i] = static_cast<int>(i % 2);
  const ClusterDescriptives even = cluster_descriptives(s.area, d, halves, 2);
  CHECK(even.components[0].component == 0);
  CHECK(even.components[1].component == 1);

  CHECK_THROWS_AS(cluster_descriptives(s.area, d, std::vector<int>{0, 1}, 2), LabelMismatch);
  std::vector<int> bad = halves;
  bad[0] = 5;
  CHECK_THROWS_AS(cluster_descriptives(s.area, d, bad, 2), LabelMismatch);
}

TEST_CASE("planted per-group means are recovered within two standard errors") {
  SynthSpec spec;
  spec.seed = 6;
  spec.planted = planted_params(2, 10.0, 0.02, 0.0, spec.seed);
  const SynthArea s = synth_generate(spec);
  const Dataset d = build_design(s.area, standardize(grade_all(s.area, GradeTable::defaults())));
  const ClusterDescriptives c = cluster_descriptives(s.area, d, s.truth.membership, 2);
  // Planted groups differ only in level, so each group's mean ln(price)
  // minus the fitted linear part is the planted intercept.
  for (const auto& comp : c.components) {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
      if (s.truth.membership[static_cast<std::size_t>(i)] != comp.component) continue;
      const double partial = d.y[i] - d.X.row(i).tail(kDesignColumns - 1).dot(
                                          spec.planted.betas.col(comp.component).tail(kDesignColumns - 1));
      sum += partial;
      sq += partial * partial;
      ++n;
    }
    const double mean = sum / static_cast<double>(n);
    const double se = std::sqrt((sq / static_cast<double>(n) - mean * mean) / static_cast<double>(n));
    CHECK(std::abs(mean - spec.planted.betas(0, comp.component)) <= 2.0 * se + 1e-12);
  }
}

TEST_CASE("coefficient table: a one-component fit reproduces the pooled column") {
  const Dataset d = fixtures::random_linear(300, 5, 7);
  FitConfig cfg;
  const MixtureFit f = fit_em(d, 1, cfg);
  const OlsResult pooled = ols_fit(d);
  const CoefficientTable t = coefficient_table(f, pooled, d);
  REQUIRE(t.columns == std::vector<std::string>{"total", "group_1"});
  CHECK(t.rows.back() == "constant");
  REQUIRE(t.cells.size() == 2);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    CHECK(std::abs(t.cells[0][r].b - t.cells[1][r].b) < 1e-8);
    CHECK(std::abs(t.cells[0][r].se - t.cells[1][r].se) < 1e-8);
    CHECK(t.cells[0][r].stars == significance_stars(t.cells[0][r].p));
  }
  // intercept is reported last
  CHECK(t.cells[0].back().b == pooled.coefficients[0]);
  CHECK(t.group_sizes == std::vector<std::size_t>{300});
  CHECK(t.f_statistic == pooled.f_statistic);
  CHECK(t.f_p_value < 1e-10);
  CHECK(t.r_squared == pooled.r_squared);
  const std::string csv = coefficients_to_csv(t);
  CHECK(csv.find("mixing_weight") != std::string::npos);
  CHECK(csv.find("hard_share") != std::string::npos);
}
