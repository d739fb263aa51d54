#pragma once

#include "landmix/mixreg.hpp"
#include "landmix/rng.hpp"
#include "oracle.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <random>
#include <string>

namespace fixtures {

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("landmix_tests_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline oracle::Matrix to_rows(const Eigen::MatrixXd& X) {
  oracle::Matrix out(static_cast<std::size_t>(X.rows()), oracle::Row(static_cast<std::size_t>(X.cols())));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = X(i, j);
  }
  return out;
}

inline std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Intercept plus `p` Gaussian predictors; y linear plus Gaussian noise.
inline landmix::Dataset random_linear(Eigen::Index n, int p, std::uint64_t seed, double noise = 0.5) {
  auto rng = landmix::make_engine(seed, "fixture");
  std::normal_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd X(n, p + 1);
  Eigen::VectorXd beta(p + 1);
  for (int j = 0; j <= p; ++j) beta[j] = unit(rng);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (int j = 1; j <= p; ++j) X(i, j) = unit(rng) * (1.0 + 0.5 * j) + 0.3 * j;
  }
  Eigen::VectorXd y = X * beta;
  for (Eigen::Index i = 0; i < n; ++i) y[i] += noise * unit(rng);
  std::vector<std::string> cols{"intercept"}, ids;
  for (int j = 1; j <= p; ++j) cols.push_back("x" + std::to_string(j));
  for (Eigen::Index i = 0; i < n; ++i) ids.push_back("r" + std::to_string(i));
  return landmix::make_dataset(std::move(y), std::move(X), cols, ids);
}

// Two lines y = 1 + 2x and y = 8 - x with small noise, alternating rows.
inline landmix::Dataset two_lines(Eigen::Index n, double noise, std::uint64_t seed) {
  auto rng = landmix::make_engine(seed, "two-lines");
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> ux(-3.0, 3.0);
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = ux(rng);
    X(i, 0) = 1.0;
    X(i, 1) = x;
    y[i] = (i % 2 == 0 ? 1.0 + 2.0 * x : 8.0 - x) + noise * unit(rng);
    ids.push_back("r" + std::to_string(i));
  }
  return landmix::make_dataset(std::move(y), std::move(X), {"intercept", "x"}, ids);
}

}  // namespace fixtures
