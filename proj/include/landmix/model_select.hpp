#pragma once

#include "landmix/mixreg.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace landmix {

// Free parameters of a K-component Gaussian regression mixture with p
// predictors: K (p + 1) coefficients, K variances, K - 1 mixing weights.
int df_of(int K, int p);

double aic(double loglik, int df);
double bic(double loglik, int df, double n);

// Classification entropy -sum r ln r, with 0 ln 0 = 0.
double entropy(const Responsibilities& r);

// Normalized entropy criterion E(K) / (L(K) - L(1)).
double nec(const MixtureFit& fit_k, const MixtureFit& fit_1);

enum class Criterion { aic, bic, nec };

std::string_view to_string(Criterion c);
std::optional<Criterion> parse_criterion(std::string_view name);

struct SelectionRow {
  int K = 0;
  int df = 0;
  std::optional<double> loglik;
  std::optional<double> aic;
  std::optional<double> bic;
  std::optional<double> nec;
  std::string error;  // non-empty when this K failed to fit

  std::optional<double> value(Criterion c) const;
};

struct SelectionReport {
  std::vector<SelectionRow> rows;  // ascending K
  std::map<Criterion, int> chosen;
  std::map<int, MixtureFit> fits;  // successful fits, including K = 1
  std::size_t n = 0;
  int p = 0;
};

// Fits K = 1 plus every K in `ks`; per-K failures are recorded in the row.
SelectionReport sweep(const Dataset& data, std::span<const int> ks, const FitConfig& config);

// K minimizing the criterion over rows where it is defined; ties go to the
// smaller K. Throws EmptyReport.
int select(std::span<const SelectionRow> rows, Criterion criterion);
int select(const SelectionReport& report, Criterion criterion);

std::string selection_to_csv(const SelectionReport& report);

}  // namespace landmix
