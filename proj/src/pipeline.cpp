#include "landmix/pipeline.hpp"

#include "landmix/diagnostics.hpp"
#include "landmix/facility_access.hpp"
#include "landmix/geo_grid.hpp"
#include "landmix/rng.hpp"

#include <json.hpp>

#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

namespace landmix {

namespace {

// Runs `fn`, rethrowing any toolkit error with the stage name attached.
template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.what(), e.exit_code());
  } catch (const std::exception& e) {
    throw StageError(name, e.what(), 2);
  }
}

std::string provenance_line(const PipelineConfig& cfg) {
  return "# landmix seed=" + std::to_string(cfg.fit.seed) + " config=" + cfg.config_hash + "\n";
}

std::filesystem::path write_output(const PipelineConfig& cfg, const std::string& name, const std::string& body,
                                   bool csv_header = true) {
  const auto path = cfg.out_dir / name;
  stage("write", [&] {
    write_file_atomic(path, (csv_header ? provenance_line(cfg) : std::string()) + body);
    return 0;
  });
  return path;
}

struct Graded {
  StudyArea area;
  GradeMatrix grades;
  ZScoreMatrix z;
  ValidationReport validation;
};

Graded load_and_grade(const PipelineConfig& cfg) {
  auto cells = stage("load_cells", [&] { return load_cells(cfg.cells); });
  auto facilities = stage("load_facilities", [&] { return load_facilities(cfg.facilities); });
  const GradeTable table = stage("load_grade_table", [&] {
    return cfg.grade_table.empty() ? GradeTable::defaults() : GradeTable::load(cfg.grade_table);
  });
  Graded g;
  g.area = stage("validate", [&] { return make_study_area(std::move(cells), std::move(facilities)); });
  g.validation = validate_area(g.area);
  if (!g.validation.duplicate_ids.empty()) {
    throw StageError("validate", "duplicate cell id '" + g.validation.duplicate_ids.front() + "'", 1);
  }
  g.grades = stage("grade", [&] { return grade_all(g.area, table); });
  g.z = stage("standardize", [&] { return standardize(g.grades); });
  return g;
}

std::string fit_name(int K) { return "fit_K" + std::to_string(K) + ".json"; }

std::optional<int> chosen_from_selection_csv(const std::filesystem::path& path, Criterion criterion) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  const CsvTable t = read_csv_file(path);
  std::vector<SelectionRow> rows;
  const std::size_t ck = t.column("K");
  const std::size_t cc = t.column(std::string(to_string(criterion)));
  for (const auto& r : t.rows) {
    SelectionRow row;
    row.K = static_cast<int>(parse_int(r.at(ck)).value_or(0));
    if (cc < r.size()) {
      if (const auto v = parse_double(r[cc])) {
        if (criterion == Criterion::aic) row.aic = v;
        if (criterion == Criterion::bic) row.bic = v;
        if (criterion == Criterion::nec) row.nec = v;
      }
    }
    rows.push_back(row);
  }
  return select(rows, criterion);
}

}  // namespace

std::vector<int> parse_k_range(const std::string& text) {
  std::vector<int> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const auto lo = parse_int(text.substr(0, dots));
    const auto hi = parse_int(text.substr(dots + 2));
    if (!lo || !hi || *lo < 1 || *hi < *lo) throw InputError("bad K range '" + text + "'");
    for (long long k = *lo; k <= *hi; ++k) out.push_back(static_cast<int>(k));
    return out;
  }
  for (const auto& f : split_fields(text)) {
    const auto k = parse_int(f);
    if (!k || *k < 1) throw InputError("bad K range '" + text + "'");
    out.push_back(static_cast<int>(*k));
  }
  if (out.empty()) throw InputError("K range is empty");
  return out;
}

PipelineConfig make_pipeline_config(const KeyValueConfig& kv) {
  PipelineConfig cfg;
  cfg.cells = kv.get_or("cells", "");
  cfg.facilities = kv.get_or("facilities", "");
  cfg.grade_table = kv.get_or("grade_table", "");
  cfg.out_dir = kv.get_or("out", "out");
  if (const auto k = kv.get("k_range")) cfg.k_range = parse_k_range(*k);
  if (kv.has("k")) cfg.chosen_k = static_cast<int>(kv.get_int("k", 0));
  if (const auto c = kv.get("criterion")) {
    const auto parsed = parse_criterion(*c);
    if (!parsed) throw InputError("unknown criterion '" + *c + "' (aic, bic, nec)");
    cfg.criterion = *parsed;
  }
  cfg.fit.seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
  cfg.fit.tol = kv.get_double("tol", cfg.fit.tol);
  cfg.fit.max_iter = static_cast<int>(kv.get_int("max_iter", cfg.fit.max_iter));
  cfg.fit.restarts = static_cast<int>(kv.get_int("restarts", cfg.fit.restarts));
  cfg.fit.variance_floor_factor = kv.get_double("variance_floor", cfg.fit.variance_floor_factor);
  cfg.fit.min_variance_ratio = kv.get_double("min_variance_ratio", cfg.fit.min_variance_ratio);
  cfg.fit.residual_start = kv.get_int("residual_start", 1) != 0;
  if (cfg.k_range.empty()) throw InputError("K range is empty");

  SynthSpec& s = cfg.synth;
  s.seed = cfg.fit.seed;
  s.grid_cols = static_cast<int>(kv.get_int("synth.cols", s.grid_cols));
  s.n_cells = static_cast<int>(kv.get_int("synth.cells", s.n_cells));
  s.cell_size_m = kv.get_double("synth.cell_size", s.cell_size_m);
  s.noise_scale = kv.get_double("synth.noise", s.noise_scale);
  const int K = static_cast<int>(kv.get_int("synth.k", 4));
  s.planted = planted_params(K, kv.get_double("synth.separation", 8.0), kv.get_double("synth.sigma", 0.05),
                             kv.get_double("synth.slope_jitter", 0.05), s.seed);
  if (kv.has("synth.weights")) {
    const auto w = kv.get_doubles("synth.weights");
    if (static_cast<int>(w.size()) != K) throw InvalidSpec("synth.weights needs K values");
    s.planted.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), K);
  }
  if (kv.has("synth.sigma2")) {
    const auto v = kv.get_doubles("synth.sigma2");
    if (static_cast<int>(v.size()) != K) throw InvalidSpec("synth.sigma2 needs K values");
    s.planted.sigmas2 = Eigen::Map<const Eigen::VectorXd>(v.data(), K);
  }
  for (int k = 0; k < K; ++k) {
    const std::string key = "synth.beta." + std::to_string(k + 1);
    if (!kv.has(key)) continue;
    const auto b = kv.get_doubles(key);
    if (static_cast<int>(b.size()) != kDesignColumns) throw InvalidSpec(key + " needs 15 values");
    s.planted.betas.col(k) = Eigen::Map<const Eigen::VectorXd>(b.data(), kDesignColumns);
  }
  if (kv.has("synth.facilities")) {
    const auto counts = kv.get_doubles("synth.facilities");
    if (counts.size() != kFacilityKindCount) throw InvalidSpec("synth.facilities needs 9 counts");
    for (std::size_t i = 0; i < kFacilityKindCount; ++i) s.facility_counts[i] = static_cast<int>(counts[i]);
  }

  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(fnv1a64(kv.canonical())));
  cfg.config_hash = hash;
  return cfg;
}

CommandResult cmd_grade(const PipelineConfig& cfg) {
  const Graded g = load_and_grade(cfg);
  CommandResult res;
  res.written.push_back(write_output(cfg, "grades.csv", grades_to_csv(g.grades)));
  res.written.push_back(write_output(cfg, "zscores.csv", zscores_to_csv(g.z)));
  std::string issues;
  for (const auto& m : g.validation.messages()) issues += m + "\n";
  res.written.push_back(write_output(cfg, "validation.txt", issues));
  res.summary = "graded " + std::to_string(g.grades.rows()) + " cells (" +
                std::to_string(g.validation.excluded_cells.size()) + " excluded)\n";
  return res;
}

CommandResult cmd_sweep(const PipelineConfig& cfg) {
  const Graded g = load_and_grade(cfg);
  const Dataset data = stage("build_design", [&] { return build_design(g.area, g.z); });
  const SelectionReport report = stage("sweep", [&] { return sweep(data, cfg.k_range, cfg.fit); });

  const std::set<int> requested(cfg.k_range.begin(), cfg.k_range.end());
  bool any_ok = false;
  for (const auto& row : report.rows) any_ok = any_ok || (requested.count(row.K) && row.loglik.has_value());
  if (!any_ok) {
    throw StageError("sweep", "no K in the range produced a fit: " + report.rows.front().error, 2);
  }

  CommandResult res;
  res.written.push_back(write_output(cfg, "selection.csv", selection_to_csv(report)));
  for (const auto& [K, fit] : report.fits) {
    res.written.push_back(write_output(cfg, fit_name(K), fit_to_json(fit, cfg.config_hash), false));
  }
  std::ostringstream s;
  for (const auto& [c, K] : report.chosen) s << "selected K by " << to_string(c) << ": " << K << "\n";
  res.summary = s.str();
  return res;
}

CommandResult cmd_report(const PipelineConfig& cfg) {
  const int K = cfg.chosen_k ? *cfg.chosen_k : stage("select", [&] {
    const auto k = chosen_from_selection_csv(cfg.out_dir / "selection.csv", cfg.criterion);
    if (!k) throw MissingFit((cfg.out_dir / "selection.csv").string());
    return *k;
  });
  const Graded g = load_and_grade(cfg);
  const Dataset data = stage("build_design", [&] { return build_design(g.area, g.z); });
  const auto fit_path = cfg.out_dir / fit_name(K);
  const MixtureFit fit = stage("load_fit", [&] {
    if (!std::filesystem::exists(fit_path)) throw MissingFit(fit_path.string());
    return fit_from_json(read_file(fit_path), data);
  });
  const OlsResult pooled = stage("ols", [&] { return ols_fit(data); });

  const std::string k = std::to_string(K);
  CommandResult res;
  stage("report", [&] {
    const std::vector<int> all(static_cast<std::size_t>(data.n()), 0);
    res.written.push_back(
        write_output(cfg, "descriptives_all.csv", descriptives_to_csv(cluster_descriptives(g.area, data, all, 1))));
    res.written.push_back(write_output(cfg, "descriptives_K" + k + ".csv",
                                       descriptives_to_csv(cluster_descriptives(g.area, data, fit.labels, K))));
    res.written.push_back(
        write_output(cfg, "coefficients_K" + k + ".csv", coefficients_to_csv(coefficient_table(fit, pooled, data))));
    res.written.push_back(write_output(cfg, "vif.csv", vif_to_csv(vif(data))));
    res.written.push_back(write_output(cfg, "labels_K" + k + ".csv", labels_to_csv(data, fit)));
    res.written.push_back(write_output(cfg, "map_K" + k + ".geojson",
                                       cells_to_geojson(g.area, data, fit, cfg.fit.seed, cfg.config_hash), false));
    return 0;
  });
  res.summary = "report for K=" + k + " written to " + cfg.out_dir.string() + "\n";
  return res;
}

CommandResult cmd_synth(const PipelineConfig& cfg) {
  const SynthArea synth = stage("synth", [&] {
    const GradeTable table = cfg.grade_table.empty() ? GradeTable::defaults() : GradeTable::load(cfg.grade_table);
    return synth_generate(cfg.synth, table);
  });
  CommandResult res;
  res.written.push_back(write_output(cfg, "cells.csv", cells_to_csv(synth.area.cells)));
  res.written.push_back(write_output(cfg, "facilities.csv", facilities_to_csv(synth.area.facilities)));
  std::string truth = truth_to_json(synth.truth, cfg.synth.seed);
  // carry the config hash alongside the seed
  auto j = nlohmann::ordered_json::parse(truth);
  j["config_hash"] = cfg.config_hash;
  res.written.push_back(write_output(cfg, "truth.json", j.dump(2) + "\n", false));
  res.summary = "generated " + std::to_string(synth.area.cells.size()) + " cells, " +
                std::to_string(synth.area.facilities.size()) + " facilities, planted K=" +
                std::to_string(cfg.synth.K()) + "\n";
  return res;
}

std::string cells_to_geojson(const StudyArea& area, const Dataset& data, const MixtureFit& fit, std::uint64_t seed,
                             const std::string& config_hash) {
  std::unordered_map<std::string, const GridCell*> by_id;
  for (const GridCell& c : area.cells) by_id.emplace(c.id, &c);
  const double h = 0.5 * area.cell_size_m;

  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["landmix"] = {{"seed", seed}, {"config_hash", config_hash}, {"K", fit.K()}};
  auto features = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const auto it = by_id.find(data.cell_ids[static_cast<std::size_t>(i)]);
    if (it == by_id.end()) throw LabelMismatch("cell '" + data.cell_ids[static_cast<std::size_t>(i)] + "' not in area");
    const GridCell& c = *it->second;
    const int label = fit.labels[static_cast<std::size_t>(i)];
    const double x0 = c.centroid_x - h, x1 = c.centroid_x + h;
    const double y0 = c.centroid_y - h, y1 = c.centroid_y + h;
    // exterior ring, counterclockwise, closed
    nlohmann::ordered_json ring = nlohmann::ordered_json::array(
        {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}});
    nlohmann::ordered_json feature;
    feature["type"] = "Feature";
    feature["geometry"] = {{"type", "Polygon"}, {"coordinates", nlohmann::ordered_json::array({ring})}};
    feature["properties"] = {{"cell_id", c.id},
                             {"component", label + 1},
                             {"land_price", c.land_price},
                             {"max_responsibility", fit.responsibilities(i, label)}};
    features.push_back(std::move(feature));
  }
  fc["features"] = std::move(features);
  return fc.dump() + "\n";
}

}  // namespace landmix
