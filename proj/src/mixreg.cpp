#include "landmix/mixreg.hpp"

#include "landmix/errors.hpp"
#include "landmix/rng.hpp"
#include "landmix/text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <unordered_map>

namespace landmix {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

struct WeightedSolve {
  Eigen::VectorXd beta;
  double weighted_rss = 0.0;
};

// Minimizes sum_i w_i (y_i - x_i' beta)^2 via column-pivoted QR of the
// sqrt-weighted design. Throws SingularDesign(component) on rank loss.
WeightedSolve weighted_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                                     int component) {
  const Eigen::ArrayXd sw = w.array().sqrt();
  const Eigen::MatrixXd Xw = X.array().colwise() * sw;
  const Eigen::VectorXd yw = (y.array() * sw).matrix();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
  if (qr.rank() < X.cols()) throw SingularDesign(component);
  WeightedSolve out;
  out.beta = qr.solve(yw);
  out.weighted_rss = (yw - Xw * out.beta).squaredNorm();
  return out;
}

struct RunResult {
  MixtureParams params;
  EStep last;
  std::vector<double> trace;
  int n_iter = 0;
  bool converged = false;
};

RunResult run_em(const Dataset& data, const Responsibilities& initial, const FitConfig& config, double floor) {
  RunResult run;
  run.params = m_step(initial, data, floor, config.min_variance_ratio);
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 1; it <= std::max(1, config.max_iter); ++it) {
    run.last = e_step_with_loglik(run.params, data);
    run.trace.push_back(run.last.loglik);
    run.n_iter = it;
    if (!std::isfinite(run.last.loglik)) throw NumericalError("log-likelihood is not finite");
    if (it > 1 && (run.last.loglik - prev) <= config.tol * std::abs(prev)) {
      run.converged = true;
      break;
    }
    if (it == config.max_iter) break;
    prev = run.last.loglik;
    run.params = m_step(run.last.r, data, floor, config.min_variance_ratio);
  }
  return run;
}

// Reorders components by descending weight; ties keep the original order.
MixtureFit finish(RunResult run, const Dataset& data, const FitConfig& config, int restart) {
  const int K = run.params.K();
  std::vector<int> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return run.params.weights[a] > run.params.weights[b]; });

  MixtureFit fit;
  fit.params.weights.resize(K);
  fit.params.sigmas2.resize(K);
  fit.params.betas.resize(run.params.betas.rows(), K);
  fit.responsibilities.resize(run.last.r.rows(), K);
  for (int k = 0; k < K; ++k) {
    const int src = order[static_cast<std::size_t>(k)];
    fit.params.weights[k] = run.params.weights[src];
    fit.params.sigmas2[k] = run.params.sigmas2[src];
    fit.params.betas.col(k) = run.params.betas.col(src);
    fit.responsibilities.col(k) = run.last.r.col(src);
  }
  fit.labels = assign(fit.responsibilities);
  fit.loglik = run.last.loglik;
  fit.loglik_trace = std::move(run.trace);
  fit.n_iter = run.n_iter;
  fit.converged = run.converged;
  fit.columns = data.columns;
  fit.seed = config.seed;
  fit.restart = restart;
  return fit;
}

void check_params(const MixtureParams& params, const Dataset& data) {
  if (params.betas.rows() != data.X.cols()) {
    throw DimensionMismatch("coefficient length " + std::to_string(params.betas.rows()) + " vs design columns " +
                            std::to_string(data.X.cols()));
  }
  if (params.betas.cols() != params.K() || params.sigmas2.size() != params.K()) {
    throw DimensionMismatch("component count differs across weights, betas and variances");
  }
  if (params.K() < 1) throw DimensionMismatch("mixture needs at least one component");
}

}  // namespace

const std::vector<std::string>& design_column_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v{"intercept"};
    for (FacilityKind k : kAllFacilityKinds) v.emplace_back(to_string(k));
    for (const char* c : {"ln_population", "female_rate", "public_land_rate", "commercial_rate", "green_rate"}) {
      v.emplace_back(c);
    }
    return v;
  }();
  return names;
}

Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd X, std::vector<std::string> columns,
                     std::vector<std::string> cell_ids) {
  if (X.rows() != y.size()) throw DimensionMismatch("design rows differ from response length");
  if (static_cast<Eigen::Index>(columns.size()) != X.cols()) throw DimensionMismatch("column names vs design");
  if (static_cast<Eigen::Index>(cell_ids.size()) != y.size()) throw DimensionMismatch("row labels vs response");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) throw NonFinite(static_cast<std::size_t>(i) + 1, "y");
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (!std::isfinite(X(i, j))) throw NonFinite(static_cast<std::size_t>(i) + 1, columns[j]);
    }
  }
  Dataset d;
  d.y = std::move(y);
  d.X = std::move(X);
  d.columns = std::move(columns);
  d.cell_ids = std::move(cell_ids);
  return d;
}

Dataset build_design(const StudyArea& area, const ZScoreMatrix& z) {
  std::unordered_map<std::string, Eigen::Index> z_row;
  for (std::size_t i = 0; i < z.cell_ids.size(); ++i) z_row.emplace(z.cell_ids[i], static_cast<Eigen::Index>(i));

  std::vector<const GridCell*> included;
  std::size_t excluded = 0;
  for (const GridCell& cell : area.cells) {
    if (is_modelable(cell)) {
      included.push_back(&cell);
    } else {
      ++excluded;
    }
  }
  if (included.empty()) throw EmptyAfterExclusion();

  const auto n = static_cast<Eigen::Index>(included.size());
  Eigen::VectorXd y(n);
  Eigen::MatrixXd X(n, kDesignColumns);
  std::vector<std::string> ids;
  ids.reserve(included.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const GridCell& c = *included[static_cast<std::size_t>(i)];
    const auto it = z_row.find(c.id);
    if (it == z_row.end()) throw InputError("no z-scores for cell '" + c.id + "'");
    y[i] = std::log(c.land_price);
    X(i, 0) = 1.0;
    X.block(i, 1, 1, kFacilityKindCount) = z.values.row(it->second);
    X(i, 10) = std::log(c.population);
    X(i, 11) = c.female_rate;
    X(i, 12) = c.public_land_rate;
    X(i, 13) = c.commercial_rate;
    X(i, 14) = c.green_rate;
    ids.push_back(c.id);
  }
  Dataset d = make_dataset(std::move(y), std::move(X), design_column_names(), std::move(ids));
  d.excluded = excluded;
  return d;
}

Dataset subset_rows(const Dataset& data, const std::vector<Eigen::Index>& rows) {
  Dataset out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.y.resize(n);
  out.X.resize(n, data.X.cols());
  out.columns = data.columns;
  out.excluded = data.excluded;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = rows[static_cast<std::size_t>(i)];
    out.y[i] = data.y[src];
    out.X.row(i) = data.X.row(src);
    out.cell_ids.push_back(data.cell_ids[static_cast<std::size_t>(src)]);
  }
  return out;
}

double variance_floor(const Dataset& data, double factor) {
  const double n = static_cast<double>(data.n());
  if (n < 2) return factor;
  const double mean = data.y.mean();
  const double var = (data.y.array() - mean).square().sum() / (n - 1.0);
  return factor * var;
}

EStep e_step_with_loglik(const MixtureParams& params, const Dataset& data) {
  check_params(params, data);
  const int K = params.K();
  const Eigen::MatrixXd means = data.X * params.betas;  // n x K
  Eigen::MatrixXd logp(data.n(), K);
  for (int k = 0; k < K; ++k) {
    const double s2 = params.sigmas2[k];
    const double log_norm = std::log(params.weights[k]) - 0.5 * (kLog2Pi + std::log(s2));
    logp.col(k) = (log_norm - (data.y - means.col(k)).array().square() / (2.0 * s2)).matrix();
  }

  EStep out;
  out.r.resize(data.n(), K);
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double m = logp.row(i).maxCoeff();
    const Eigen::ArrayXd e = (logp.row(i).array() - m).exp().transpose();
    const double s = e.sum();
    out.r.row(i) = (e / s).matrix().transpose();
    total += m + std::log(s);
  }
  out.loglik = total;
  return out;
}

Responsibilities e_step(const MixtureParams& params, const Dataset& data) {
  return e_step_with_loglik(params, data).r;
}

double loglik(const MixtureParams& params, const Dataset& data) { return e_step_with_loglik(params, data).loglik; }

// Maximizes sum_k -eff_k/2 ln s_k - rss_k/(2 s_k) subject to s_k >= floor and
// s_k in [m, m/ratio] for a common m; raw estimates are floored first. The objective of t = ln m is concave,
// so a golden-section search over t is exact to rounding.
Eigen::VectorXd constrained_variances(const Eigen::VectorXd& eff, const Eigen::VectorXd& rss, double floor,
                                      double ratio) {
  const Eigen::Index K = eff.size();
  Eigen::VectorXd u(K);
  for (Eigen::Index k = 0; k < K; ++k) u[k] = std::max(rss[k] / eff[k], floor);
  if (!(ratio > 0.0) || K < 2 || u.minCoeff() >= ratio * u.maxCoeff()) return u;

  const double width = -std::log(ratio);
  auto place = [&](double t) {
    Eigen::VectorXd s(K);
    for (Eigen::Index k = 0; k < K; ++k) s[k] = std::exp(std::clamp(std::log(u[k]), t, t + width));
    return s;
  };
  auto objective = [&](double t) {
    const Eigen::VectorXd s = place(t);
    double q = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) q += -0.5 * eff[k] * std::log(s[k]) - 0.5 * rss[k] / s[k];
    return q;
  };
  // The optimum leaves the smallest raw variance at or above the window's
  // lower edge and the largest at or below its upper edge.
  double a = std::log(u.minCoeff());
  double b = std::log(u.maxCoeff()) - width;
  constexpr double phi = 0.6180339887498949;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = objective(c), fd = objective(d);
  for (int it = 0; it < 200 && b - a > 1e-14 * (1.0 + std::abs(a)); ++it) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = objective(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = objective(c);
    }
  }
  return place(0.5 * (a + b));
}

MixtureParams m_step(const Responsibilities& r, const Dataset& data, double var_floor) {
  return m_step(r, data, var_floor, 0.0);
}

MixtureParams m_step(const Responsibilities& r, const Dataset& data, double var_floor, double min_variance_ratio) {
  if (r.rows() != data.n()) throw DimensionMismatch("responsibility rows vs dataset rows");
  const int K = static_cast<int>(r.cols());
  const double n = static_cast<double>(data.n());
  const double min_weight = static_cast<double>(data.X.cols());

  MixtureParams params;
  params.weights.resize(K);
  params.sigmas2.resize(K);
  params.betas.resize(data.X.cols(), K);
  Eigen::VectorXd effs(K), rss(K);
  for (int k = 0; k < K; ++k) {
    const double eff = r.col(k).sum();
    if (!(eff > min_weight)) throw DegenerateComponent(k, eff);
    const WeightedSolve ws = weighted_least_squares(data.X, data.y, r.col(k), k);
    params.weights[k] = eff / n;
    params.betas.col(k) = ws.beta;
    effs[k] = eff;
    rss[k] = ws.weighted_rss;
  }
  params.sigmas2 = constrained_variances(effs, rss, var_floor, min_variance_ratio);
  return params;
}

MixtureParams m_step(const Responsibilities& r, const Dataset& data) {
  return m_step(r, data, variance_floor(data));
}

Responsibilities random_responsibilities(Eigen::Index n, int K, std::uint64_t seed, int restart) {
  auto rng = make_engine(derive_seed(seed, "em-init", static_cast<std::uint64_t>(K)), "restart",
                         static_cast<std::uint64_t>(restart));
  std::exponential_distribution<double> gamma1(1.0);  // Gamma(1) draws give Dirichlet(1) rows
  Responsibilities r(n, K);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < K; ++k) {
      r(i, k) = gamma1(rng) + std::numeric_limits<double>::min();
      s += r(i, k);
    }
    r.row(i) /= s;
  }
  return r;
}

Responsibilities residual_responsibilities(const Dataset& data, int K) {
  if (K < 1) throw InputError("component count must be at least 1");
  const Eigen::Index n = data.n();
  const OlsResult pooled = ols_fit(data);
  const Eigen::VectorXd e = data.y - data.X * pooled.coefficients;

  std::vector<double> sorted(e.data(), e.data() + n);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> centre(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    centre[static_cast<std::size_t>(k)] =
        sorted[static_cast<std::size_t>((k + 0.5) * static_cast<double>(n) / K)];
  }

  std::vector<int> label(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < 200; ++iter) {
    bool changed = false;
    std::vector<double> sum(static_cast<std::size_t>(K), 0.0);
    std::vector<double> count(static_cast<std::size_t>(K), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      int b = 0;
      for (int k = 1; k < K; ++k) {
        if (std::abs(e[i] - centre[static_cast<std::size_t>(k)]) < std::abs(e[i] - centre[static_cast<std::size_t>(b)])) {
          b = k;
        }
      }
      auto& slot = label[static_cast<std::size_t>(i)];
      changed = changed || slot != b;
      slot = b;
      sum[static_cast<std::size_t>(b)] += e[i];
      count[static_cast<std::size_t>(b)] += 1.0;
    }
    if (!changed) break;
    for (std::size_t k = 0; k < centre.size(); ++k) {
      if (count[k] > 0.0) centre[k] = sum[k] / count[k];
    }
  }

  Responsibilities r = Responsibilities::Zero(n, K);
  for (Eigen::Index i = 0; i < n; ++i) r(i, label[static_cast<std::size_t>(i)]) = 1.0;
  return r;
}

MixtureFit fit_em(const Dataset& data, int K, const FitConfig& config) {
  if (K < 1) throw InputError("component count must be at least 1");
  const auto needed = static_cast<std::size_t>(K) * static_cast<std::size_t>(data.p() + 2);
  if (static_cast<std::size_t>(data.n()) <= needed) throw TooFewRows(static_cast<std::size_t>(data.n()), needed);

  const double floor = variance_floor(data, config.variance_floor_factor);
  const int restarts = std::max(1, config.restarts);
  std::optional<RunResult> best;
  int best_restart = -1;
  const bool extra = config.residual_start && K > 1;
  for (int rs = 0; rs < restarts + (extra ? 1 : 0); ++rs) {
    try {
      const Responsibilities init = rs < restarts ? random_responsibilities(data.n(), K, config.seed, rs)
                                                  : residual_responsibilities(data, K);
      RunResult run = run_em(data, init, config, floor);
      if (!best || run.last.loglik > best->last.loglik) {
        best = std::move(run);
        best_restart = rs;
      }
    } catch (const NumericalError&) {
      // degenerate restart; try the next initialization
    }
  }
  if (!best) throw AllRestartsDegenerate(restarts + (extra ? 1 : 0));
  return finish(std::move(*best), data, config, best_restart);
}

MixtureFit fit_em_from(const Dataset& data, const Responsibilities& initial, const FitConfig& config) {
  return finish(run_em(data, initial, config, variance_floor(data, config.variance_floor_factor)), data, config, 0);
}

std::vector<int> assign(const Responsibilities& r) {
  std::vector<int> labels(static_cast<std::size_t>(r.rows()), 0);
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    int best = 0;
    for (Eigen::Index k = 1; k < r.cols(); ++k) {
      if (r(i, k) > r(i, best)) best = static_cast<int>(k);
    }
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

OlsResult ols_fit(const Dataset& data) {
  const Eigen::Index n = data.n();
  const Eigen::Index cols = data.X.cols();
  if (n <= cols) throw TooFewRows(static_cast<std::size_t>(n), static_cast<std::size_t>(cols));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(data.X);
  if (qr.rank() < cols) throw SingularDesign(-1);

  OlsResult out;
  out.coefficients = qr.solve(data.y);
  const Eigen::VectorXd resid = data.y - data.X * out.coefficients;
  out.rss = resid.squaredNorm();
  const double tss = (data.y.array() - data.y.mean()).square().sum();
  out.df_model = static_cast<int>(cols) - 1;
  out.df_resid = static_cast<int>(n - cols);
  out.sigma2 = out.rss / out.df_resid;
  out.r_squared = tss > 0.0 ? 1.0 - out.rss / tss : 0.0;
  out.f_statistic = out.df_model > 0 ? ((tss - out.rss) / out.df_model) / out.sigma2 : 0.0;

  const Eigen::MatrixXd xtx_inv =
      (data.X.transpose() * data.X).ldlt().solve(Eigen::MatrixXd::Identity(cols, cols));
  out.std_errors = (out.sigma2 * xtx_inv.diagonal()).array().sqrt().matrix();
  return out;
}

Eigen::MatrixXd component_std_errors(const MixtureFit& fit, const Dataset& data) {
  check_params(fit.params, data);
  if (fit.responsibilities.rows() != data.n()) throw DimensionMismatch("fit responsibilities vs dataset rows");
  const Eigen::Index cols = data.X.cols();
  Eigen::MatrixXd se(cols, fit.K());
  for (int k = 0; k < fit.K(); ++k) {
    const Eigen::VectorXd w = fit.responsibilities.col(k);
    const double eff = w.sum();
    const Eigen::VectorXd e = data.y - data.X * fit.params.betas.col(k);
    const double dof = eff - static_cast<double>(cols);
    if (!(dof > 0.0)) throw DegenerateComponent(k, eff);
    const double s2 = (w.array() * e.array().square()).sum() / dof;
    const Eigen::MatrixXd xtwx = data.X.transpose() * (data.X.array().colwise() * w.array()).matrix();
    const Eigen::MatrixXd inv = xtwx.ldlt().solve(Eigen::MatrixXd::Identity(cols, cols));
    se.col(k) = (s2 * inv.diagonal()).array().sqrt().matrix();
  }
  return se;
}

std::string fit_to_json(const MixtureFit& fit, const std::string& config_hash) {
  nlohmann::ordered_json j;
  j["format"] = "landmix-mixture-fit";
  j["version"] = 1;
  j["K"] = fit.K();
  j["seed"] = fit.seed;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["restart"] = fit.restart;
  j["n_iter"] = fit.n_iter;
  j["converged"] = fit.converged;
  j["loglik"] = fit.loglik;
  j["columns"] = fit.columns;
  auto comps = nlohmann::ordered_json::array();
  for (int k = 0; k < fit.K(); ++k) {
    nlohmann::ordered_json c;
    c["weight"] = fit.params.weights[k];
    c["sigma2"] = fit.params.sigmas2[k];
    auto beta = nlohmann::ordered_json::array();
    for (Eigen::Index b = 0; b < fit.params.betas.rows(); ++b) {
      const std::string name =
          static_cast<std::size_t>(b) < fit.columns.size() ? fit.columns[static_cast<std::size_t>(b)] : "";
      beta.push_back({{"column", name}, {"value", fit.params.betas(b, k)}});
    }
    c["beta"] = std::move(beta);
    comps.push_back(std::move(c));
  }
  j["components"] = std::move(comps);
  j["loglik_trace"] = fit.loglik_trace;
  return j.dump(2) + "\n";
}

MixtureFit fit_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed fit file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("format") || j["format"] != "landmix-mixture-fit") {
    throw InputError("not a mixture fit file");
  }
  try {
    MixtureFit fit;
    const int K = j.at("K").get<int>();
    fit.seed = j.at("seed").get<std::uint64_t>();
    fit.restart = j.at("restart").get<int>();
    fit.n_iter = j.at("n_iter").get<int>();
    fit.converged = j.at("converged").get<bool>();
    fit.loglik = j.at("loglik").get<double>();
    fit.columns = j.at("columns").get<std::vector<std::string>>();
    fit.loglik_trace = j.value("loglik_trace", std::vector<double>{});
    const auto& comps = j.at("components");
    if (static_cast<int>(comps.size()) != K) throw InputError("fit file: component count differs from K");
    const auto rows = static_cast<Eigen::Index>(fit.columns.size());
    fit.params.weights.resize(K);
    fit.params.sigmas2.resize(K);
    fit.params.betas.resize(rows, K);
    for (int k = 0; k < K; ++k) {
      const auto& c = comps[static_cast<std::size_t>(k)];
      fit.params.weights[k] = c.at("weight").get<double>();
      fit.params.sigmas2[k] = c.at("sigma2").get<double>();
      const auto& beta = c.at("beta");
      if (static_cast<Eigen::Index>(beta.size()) != rows) throw InputError("fit file: coefficient length mismatch");
      for (Eigen::Index b = 0; b < rows; ++b) {
        fit.params.betas(b, k) = beta[static_cast<std::size_t>(b)].at("value").get<double>();
      }
    }
    return fit;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed fit file: ") + e.what());
  }
}

MixtureFit fit_from_json(const std::string& text, const Dataset& data) {
  MixtureFit fit = fit_from_json(text);
  if (fit.columns != data.columns) throw DimensionMismatch("fit columns differ from dataset columns");
  fit.responsibilities = e_step(fit.params, data);
  fit.labels = assign(fit.responsibilities);
  return fit;
}

std::string labels_to_csv(const Dataset& data, const MixtureFit& fit) {
  std::string out = "cell_id,component,max_responsibility\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const int label = fit.labels[static_cast<std::size_t>(i)];
    out += data.cell_ids[static_cast<std::size_t>(i)];
    out += ',';
    out += std::to_string(label + 1);
    out += ',';
    out += format_double(fit.responsibilities(i, label));
    out += '\n';
  }
  return out;
}

}  // namespace landmix
