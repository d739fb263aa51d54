#include "landmix/model_select.hpp"

#include "landmix/errors.hpp"
#include "landmix/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace landmix {

int df_of(int K, int p) { return K * (p + 2) + (K - 1); }

double aic(double loglik, int df) { return 2.0 * df - 2.0 * loglik; }

double bic(double loglik, int df, double n) { return df * std::log(n) - 2.0 * loglik; }

double entropy(const Responsibilities& r) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index k = 0; k < r.cols(); ++k) {
      const double v = r(i, k);
      if (v > 0.0) e -= v * std::log(v);
    }
  }
  // -0.0 from exact one-hot rows
  return e + 0.0;
}

double nec(const MixtureFit& fit_k, const MixtureFit& fit_1) {
  if (fit_k.K() < 2) throw UndefinedForK1();
  if (fit_1.K() != 1) throw InputError("NEC baseline must be a single-component fit");
  const double gain = fit_k.loglik - fit_1.loglik;
  if (!(gain > 0.0)) throw NonPositiveLikelihoodGain(gain);
  return entropy(fit_k.responsibilities) / gain;
}

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::aic: return "aic";
    case Criterion::bic: return "bic";
    case Criterion::nec: return "nec";
  }
  return "";
}

std::optional<Criterion> parse_criterion(std::string_view name) {
  for (Criterion c : {Criterion::aic, Criterion::bic, Criterion::nec}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::optional<double> SelectionRow::value(Criterion c) const {
  switch (c) {
    case Criterion::aic: return aic;
    case Criterion::bic: return bic;
    case Criterion::nec: return nec;
  }
  return std::nullopt;
}

SelectionReport sweep(const Dataset& data, std::span<const int> ks, const FitConfig& config) {
  if (ks.empty()) throw InputError("K range is empty");
  const std::set<int> k_set(ks.begin(), ks.end());
  if (*k_set.begin() < 1) throw InputError("K range must start at 1 or above");

  SelectionReport report;
  report.n = static_cast<std::size_t>(data.n());
  report.p = data.p();

  std::optional<MixtureFit> baseline;
  std::string baseline_error;
  try {
    baseline = fit_em(data, 1, config);
  } catch (const Error& e) {
    baseline_error = e.what();
  }

  for (int K : k_set) {
    SelectionRow row;
    row.K = K;
    row.df = df_of(K, report.p);
    try {
      MixtureFit fit = K == 1 && baseline ? *baseline : fit_em(data, K, config);
      row.loglik = fit.loglik;
      row.aic = aic(fit.loglik, row.df);
      row.bic = bic(fit.loglik, row.df, static_cast<double>(report.n));
      if (K >= 2) {
        if (baseline) {
          try {
            row.nec = nec(fit, *baseline);
          } catch (const Error& e) {
            row.error = e.what();
          }
        } else {
          row.error = "K=1 baseline failed: " + baseline_error;
        }
      }
      report.fits.emplace(K, std::move(fit));
    } catch (const Error& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  if (baseline) report.fits.emplace(1, std::move(*baseline));

  for (Criterion c : {Criterion::aic, Criterion::bic, Criterion::nec}) {
    try {
      report.chosen[c] = select(report.rows, c);
    } catch (const EmptyReport&) {
      // criterion undefined over this range (e.g. NEC with K = 1 only)
    }
  }
  return report;
}

int select(std::span<const SelectionRow> rows, Criterion criterion) {
  std::optional<int> best_k;
  double best = 0.0;
  for (const SelectionRow& row : rows) {
    const auto v = row.value(criterion);
    if (!v || !std::isfinite(*v)) continue;
    if (!best_k || *v < best || (*v == best && row.K < *best_k)) {
      best = *v;
      best_k = row.K;
    }
  }
  if (!best_k) throw EmptyReport();
  return *best_k;
}

int select(const SelectionReport& report, Criterion criterion) { return select(report.rows, criterion); }

std::string selection_to_csv(const SelectionReport& report) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  std::string out = "K,loglik,df,aic,bic,nec,error\n";
  for (const SelectionRow& row : report.rows) {
    std::string err = row.error;
    std::replace(err.begin(), err.end(), ',', ';');
    out += std::to_string(row.K) + ',' + opt(row.loglik) + ',' + std::to_string(row.df) + ',' + opt(row.aic) + ',' +
           opt(row.bic) + ',' + opt(row.nec) + ',' + err + '\n';
  }
  return out;
}

}  // namespace landmix
