#pragma once

#include "landmix/facility_access.hpp"
#include "landmix/geo_grid.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace landmix {

// Hedonic design: intercept, nine SOC z-scores, ln(population) and four
// land-use / demographic controls.
inline constexpr int kPredictorCount = 14;
inline constexpr int kDesignColumns = kPredictorCount + 1;

const std::vector<std::string>& design_column_names();

struct Dataset {
  Eigen::VectorXd y;  // ln(land price)
  Eigen::MatrixXd X;  // n x (p + 1), column 0 is the intercept
  std::vector<std::string> columns;
  std::vector<std::string> cell_ids;
  std::size_t excluded = 0;  // cells dropped for zero price or population

  Eigen::Index n() const { return y.size(); }
  // Predictors excluding the intercept.
  int p() const { return static_cast<int>(X.cols()) - 1; }
};

// Validates shapes and finiteness. Throws DimensionMismatch / NonFinite.
Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd X, std::vector<std::string> columns,
                     std::vector<std::string> cell_ids);

// Rows follow the modelable cells of `area` in input order; `z` must cover
// every one of them by id.
Dataset build_design(const StudyArea& area, const ZScoreMatrix& z);

// Row-shuffled / row-selected copy; used by invariance checks and bootstraps.
Dataset subset_rows(const Dataset& data, const std::vector<Eigen::Index>& rows);

struct MixtureParams {
  Eigen::VectorXd weights;  // K mixing weights on the simplex
  Eigen::MatrixXd betas;    // (p + 1) x K, one coefficient vector per column
  Eigen::VectorXd sigmas2;  // K component variances

  int K() const { return static_cast<int>(weights.size()); }
};

// n x K posterior component probabilities.
using Responsibilities = Eigen::MatrixXd;

// Floor applied to every component variance: factor * var(y).
double variance_floor(const Dataset& data, double factor = 1e-6);

// sum_i ln sum_k a_k N(y_i | x_i' beta_k, sigma_k^2), per-row log-sum-exp.
double loglik(const MixtureParams& params, const Dataset& data);

struct EStep {
  Responsibilities r;
  double loglik = 0.0;
};

EStep e_step_with_loglik(const MixtureParams& params, const Dataset& data);
Responsibilities e_step(const MixtureParams& params, const Dataset& data);

// Weighted least squares per component. Throws DegenerateComponent when a
// component's effective weight is <= p + 1, SingularDesign on rank loss.
MixtureParams m_step(const Responsibilities& r, const Dataset& data, double var_floor);
// Variances maximize the expected complete-data loglik subject to
// min_k s_k >= min_variance_ratio * max_k s_k (0 disables the constraint).
MixtureParams m_step(const Responsibilities& r, const Dataset& data, double var_floor, double min_variance_ratio);
MixtureParams m_step(const Responsibilities& r, const Dataset& data);

struct FitConfig {
  double tol = 1e-8;
  int max_iter = 500;
  int restarts = 10;
  std::uint64_t seed = 1;
  double variance_floor_factor = 1e-6;
  // One extra start from a 1-D k-means partition of pooled OLS residuals,
  // run after the random restarts (restart index == restarts).
  bool residual_start = true;
  // Smallest allowed sigma_k^2 / max_j sigma_j^2; blocks spurious spike
  // components. 0 leaves only the absolute floor.
  double min_variance_ratio = 0.01;
};

struct MixtureFit {
  MixtureParams params;
  Responsibilities responsibilities;
  std::vector<int> labels;
  std::vector<double> loglik_trace;  // one entry per EM iteration
  std::vector<std::string> columns;
  double loglik = 0.0;
  int n_iter = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  int restart = 0;  // index of the restart that produced this fit

  int K() const { return params.K(); }
};

// Best of `config.restarts` Dirichlet(1)-initialized EM runs (plus the
// residual start when enabled); components are
// reported in descending mixing weight. Throws TooFewRows when
// n <= K (p + 2), AllRestartsDegenerate when no restart survives.
MixtureFit fit_em(const Dataset& data, int K, const FitConfig& config);

// Single EM run from explicit starting responsibilities.
MixtureFit fit_em_from(const Dataset& data, const Responsibilities& initial, const FitConfig& config);

// Argmax per row; ties go to the lower component index.
std::vector<int> assign(const Responsibilities& r);

// Hard partition from 1-D k-means (quantile-seeded) on pooled OLS residuals.
Responsibilities residual_responsibilities(const Dataset& data, int K);

// Dirichlet(1) rows, reproducible from (seed, K, restart).
Responsibilities random_responsibilities(Eigen::Index n, int K, std::uint64_t seed, int restart);

struct OlsResult {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  double sigma2 = 0.0;  // RSS / (n - p - 1)
  double rss = 0.0;
  double r_squared = 0.0;
  double f_statistic = 0.0;
  int df_model = 0;
  int df_resid = 0;
};

// Pooled OLS; column 0 of X must be the intercept. Throws SingularDesign.
OlsResult ols_fit(const Dataset& data);

// Per-component standard errors from responsibility-weighted least squares:
// s_k^2 (X' W_k X)^-1 with s_k^2 = sum r e^2 / (sum r - p - 1). For K = 1
// this is the classical OLS standard error. (p + 1) x K.
Eigen::MatrixXd component_std_errors(const MixtureFit& fit, const Dataset& data);

// JSON with round-trip number precision.
std::string fit_to_json(const MixtureFit& fit, const std::string& config_hash = {});
// Responsibilities and labels are not stored; pass the dataset to rebuild
// them from the parameters.
MixtureFit fit_from_json(const std::string& text);
MixtureFit fit_from_json(const std::string& text, const Dataset& data);

std::string labels_to_csv(const Dataset& data, const MixtureFit& fit);

}  // namespace landmix
