#include "landmix/synth.hpp"

#include "landmix/errors.hpp"
#include "landmix/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <array>
#include <cstdio>
#include <random>

namespace landmix {

namespace {

// Marginals loosely shaped like an urban district's cell attributes:
// heavy-tailed population, balanced female share, sparse commercial/green.
constexpr double kLogPopMean = 5.495;
constexpr double kLogPopSd = 0.984;
struct BetaShape {
  double a;
  double b;
};
constexpr BetaShape kFemale{19.0, 19.0};
constexpr BetaShape kPublicLand{0.84, 2.05};
constexpr BetaShape kCommercial{0.1, 2.4};
constexpr BetaShape kGreen{0.1, 4.9};

// Expected value of each design column under the draws above (SOC columns
// are centred); intercept offsets are placed at this point.
constexpr double mean_of(BetaShape s) { return s.a / (s.a + s.b); }
constexpr std::array<double, kDesignColumns> kColumnMeans = {
    1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    kLogPopMean, mean_of(kFemale), mean_of(kPublicLand), mean_of(kCommercial), mean_of(kGreen)};

double draw_beta(std::mt19937_64& rng, BetaShape shape) {
  std::gamma_distribution<double> ga(shape.a, 1.0);
  std::gamma_distribution<double> gb(shape.b, 1.0);
  while (true) {
    const double x = ga(rng);
    const double y = gb(rng);
    if (x + y > 0.0) return x / (x + y);
  }
}

struct CellCovariates {
  double population;
  double female;
  double public_land;
  double commercial;
  double green;
};

CellCovariates draw_covariates(std::mt19937_64& rng) {
  std::normal_distribution<double> log_pop(kLogPopMean, kLogPopSd);
  CellCovariates c{};
  c.population = std::max(1.0, std::round(std::exp(log_pop(rng))));
  c.female = draw_beta(rng, kFemale);
  c.public_land = draw_beta(rng, kPublicLand);
  c.commercial = draw_beta(rng, kCommercial);
  c.green = draw_beta(rng, kGreen);
  return c;
}

void fill_controls(Eigen::MatrixXd& X, Eigen::Index i, const CellCovariates& c) {
  X(i, 0) = 1.0;
  X(i, 10) = std::log(c.population);
  X(i, 11) = c.female;
  X(i, 12) = c.public_land;
  X(i, 13) = c.commercial;
  X(i, 14) = c.green;
}

std::vector<int> draw_membership(const SynthSpec& spec) {
  auto rng = make_engine(spec.seed, "membership");
  std::discrete_distribution<int> pick(spec.planted.weights.data(),
                                       spec.planted.weights.data() + spec.planted.weights.size());
  std::vector<int> m(static_cast<std::size_t>(spec.n_cells));
  for (int& v : m) v = pick(rng);
  return m;
}

// y = X beta_k + noise, row by row.
Eigen::VectorXd draw_response(const SynthSpec& spec, const Eigen::MatrixXd& X, const std::vector<int>& membership) {
  auto rng = make_engine(spec.seed, "noise");
  std::normal_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd y(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const int k = membership[static_cast<std::size_t>(i)];
    const double sd = std::sqrt(spec.planted.sigmas2[k]) * spec.noise_scale;
    const double e = unit(rng);
    y[i] = X.row(i).dot(spec.planted.betas.col(k)) + sd * e;
  }
  return y;
}

std::string cell_id(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "c%05d", i + 1);
  return buf;
}

}  // namespace

void SynthSpec::validate() const {
  if (grid_cols < 1) throw InvalidSpec("grid_cols must be positive");
  if (n_cells < 2) throw InvalidSpec("need at least two cells");
  if (!(cell_size_m > 0.0)) throw InvalidSpec("cell size must be positive");
  const int K = planted.K();
  if (K < 1) throw InvalidSpec("planted K must be at least 1");
  if (planted.betas.rows() != kDesignColumns || planted.betas.cols() != K) {
    throw InvalidSpec("planted coefficients must be " + std::to_string(kDesignColumns) + " x K");
  }
  if (planted.sigmas2.size() != K) throw InvalidSpec("one planted variance per component");
  double sum = 0.0;
  for (int k = 0; k < K; ++k) {
    if (!(planted.weights[k] > 0.0)) throw InvalidSpec("planted weights must be positive");
    if (!(planted.sigmas2[k] > 0.0)) throw InvalidSpec("planted variances must be positive");
    sum += planted.weights[k];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidSpec("planted weights must sum to 1");
  if (!(noise_scale >= 0.0)) throw InvalidSpec("noise scale must be nonnegative");
  for (int c : facility_counts) {
    if (c < 0) throw InvalidSpec("facility counts must be nonnegative");
  }
}

MixtureParams planted_params(int K, double separation, double sigma, double slope_jitter, std::uint64_t seed,
                             double base_intercept) {
  if (K < 1) throw InvalidSpec("planted K must be at least 1");
  if (!(sigma > 0.0)) throw InvalidSpec("planted sigma must be positive");
  if (slope_jitter < 0.0 || slope_jitter > 0.2) throw InvalidSpec("slope jitter must lie in [0, 0.2]");

  auto rng = make_engine(seed, "planted");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto signed_magnitude = [&](double lo, double hi) {
    const double m = lo + (hi - lo) * unit(rng);
    return unit(rng) < 0.5 ? -m : m;
  };

  Eigen::VectorXd base(kDesignColumns);
  base[0] = base_intercept;
  for (int j = 1; j <= 9; ++j) base[j] = signed_magnitude(0.4, 0.8);
  base[10] = signed_magnitude(0.4, 0.6);   // ln population
  base[11] = signed_magnitude(1.0, 2.0);   // female rate
  base[12] = signed_magnitude(1.0, 2.5);   // public land
  base[13] = signed_magnitude(1.0, 2.0);   // commercial
  base[14] = signed_magnitude(1.5, 3.0);   // green

  MixtureParams p;
  p.weights.resize(K);
  p.sigmas2 = Eigen::VectorXd::Constant(K, sigma * sigma);
  p.betas.resize(kDesignColumns, K);
  for (int k = 0; k < K; ++k) p.weights[k] = 1.0 + 0.5 * (K - 1 - k);
  p.weights /= p.weights.sum();
  for (int k = 0; k < K; ++k) {
    for (int j = 1; j < kDesignColumns; ++j) {
      p.betas(j, k) = base[j] + slope_jitter * (2.0 * unit(rng) - 1.0);
    }
    double shift = 0.0;
    for (int j = 1; j < kDesignColumns; ++j) shift += (p.betas(j, k) - base[j]) * kColumnMeans[j];
    p.betas(0, k) = base_intercept + separation * sigma * (0.5 * (K - 1) - k) - shift;
  }
  return p;
}

SynthDataset synth_dataset(const SynthSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.n_cells);
  auto rng = make_engine(spec.seed, "covariates");
  std::normal_distribution<double> unit(0.0, 1.0);

  Eigen::MatrixXd X(n, kDesignColumns);
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 1; j <= 9; ++j) X(i, j) = unit(rng);
    fill_controls(X, i, draw_covariates(rng));
    ids.push_back(cell_id(static_cast<int>(i)));
  }
  const auto membership = draw_membership(spec);
  Eigen::VectorXd y = draw_response(spec, X, membership);

  SynthDataset out;
  out.data = make_dataset(std::move(y), std::move(X), design_column_names(), ids);
  out.truth.params = spec.planted;
  out.truth.cell_ids = std::move(ids);
  out.truth.membership = membership;
  return out;
}

SynthArea synth_generate(const SynthSpec& spec, const GradeTable& table) {
  spec.validate();
  for (int c : spec.facility_counts) {
    if (c < 1) throw InvalidSpec("every facility kind needs at least one point to standardize its grades");
  }

  const int rows = (spec.n_cells + spec.grid_cols - 1) / spec.grid_cols;
  const double width = spec.grid_cols * spec.cell_size_m;
  const double height = rows * spec.cell_size_m;

  std::vector<GridCell> cells;
  cells.reserve(static_cast<std::size_t>(spec.n_cells));
  std::vector<CellCovariates> covs;
  auto cov_rng = make_engine(spec.seed, "covariates");
  for (int i = 0; i < spec.n_cells; ++i) {
    const CellCovariates c = draw_covariates(cov_rng);
    GridCell cell;
    cell.id = cell_id(i);
    cell.centroid_x = spec.origin_x + (i % spec.grid_cols + 0.5) * spec.cell_size_m;
    cell.centroid_y = spec.origin_y + (i / spec.grid_cols + 0.5) * spec.cell_size_m;
    cell.population = c.population;
    cell.female_rate = c.female;
    cell.public_land_rate = c.public_land;
    cell.commercial_rate = c.commercial;
    cell.green_rate = c.green;
    cell.land_price = 1.0;  // replaced once the response is drawn
    cells.push_back(std::move(cell));
    covs.push_back(c);
  }

  std::vector<FacilityPoint> facilities;
  for (FacilityKind kind : kAllFacilityKinds) {
    auto rng = make_engine(spec.seed, "facilities", index_of(kind));
    std::uniform_real_distribution<double> ux(spec.origin_x, spec.origin_x + width);
    std::uniform_real_distribution<double> uy(spec.origin_y, spec.origin_y + height);
    for (int c = 0; c < spec.facility_counts[index_of(kind)]; ++c) {
      const double x = ux(rng);
      const double y = uy(rng);
      facilities.push_back(FacilityPoint{kind, x, y});
    }
  }

  StudyArea area = make_study_area(std::move(cells), std::move(facilities), spec.cell_size_m);
  const ZScoreMatrix z = standardize(grade_all(area, table));

  const auto n = static_cast<Eigen::Index>(spec.n_cells);
  Eigen::MatrixXd X(n, kDesignColumns);
  for (Eigen::Index i = 0; i < n; ++i) {
    fill_controls(X, i, covs[static_cast<std::size_t>(i)]);
    X.block(i, 1, 1, kFacilityKindCount) = z.values.row(i);
  }
  const auto membership = draw_membership(spec);
  const Eigen::VectorXd y = draw_response(spec, X, membership);
  for (Eigen::Index i = 0; i < n; ++i) area.cells[static_cast<std::size_t>(i)].land_price = std::exp(y[i]);

  SynthArea out;
  out.truth.params = spec.planted;
  for (const auto& c : area.cells) out.truth.cell_ids.push_back(c.id);
  out.truth.membership = membership;
  out.area = std::move(area);
  return out;
}

std::string truth_to_json(const PlantedTruth& truth, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["format"] = "landmix-planted-truth";
  j["seed"] = seed;
  j["K"] = truth.params.K();
  j["columns"] = design_column_names();
  auto comps = nlohmann::ordered_json::array();
  for (int k = 0; k < truth.params.K(); ++k) {
    std::vector<double> beta(truth.params.betas.col(k).data(),
                             truth.params.betas.col(k).data() + truth.params.betas.rows());
    comps.push_back({{"weight", truth.params.weights[k]}, {"sigma2", truth.params.sigmas2[k]}, {"beta", beta}});
  }
  j["components"] = std::move(comps);
  std::vector<int> one_based;
  for (int m : truth.membership) one_based.push_back(m + 1);
  j["cell_ids"] = truth.cell_ids;
  j["membership"] = one_based;
  return j.dump(2) + "\n";
}

}  // namespace landmix
