#include "fixtures.hpp"
#include "landmix/errors.hpp"
#include "landmix/pipeline.hpp"

#include <doctest.h>
#include <json.hpp>

#include <map>
#include <set>
#include <sstream>

using namespace landmix;

namespace {

KeyValueConfig base_config(const std::filesystem::path& dir, int synth_k = 4) {
  KeyValueConfig kv;
  kv.set("seed", "20240101");
  kv.set("out", dir.string());
  kv.set("cells", (dir / "cells.csv").string());
  kv.set("facilities", (dir / "facilities.csv").string());
  kv.set("synth.k", std::to_string(synth_k));
  kv.set("synth.separation", "10");
  kv.set("synth.sigma", "0.02");
  kv.set("synth.slope_jitter", "0.004");
  kv.set("restarts", "3");
  return kv;
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) out[e.path().filename().string()] = read_file(e.path());
  return out;
}

}  // namespace

TEST_CASE("K ranges parse as spans, lists or single values") {
  CHECK(parse_k_range("2..6") == std::vector<int>{2, 3, 4, 5, 6});
  CHECK(parse_k_range("1,2,4") == std::vector<int>{1, 2, 4});
  CHECK(parse_k_range("3") == std::vector<int>{3});
  CHECK_THROWS_AS(parse_k_range("6..2"), InputError);
  CHECK_THROWS_AS(parse_k_range("0"), InputError);
  CHECK_THROWS_AS(parse_k_range(""), InputError);
}

TEST_CASE("config keys map onto the pipeline settings and the hash tracks content") {
  KeyValueConfig kv = base_config("x");
  kv.set("k_range", "1..3");
  kv.set("criterion", "bic");
  kv.set("tol", "1e-6");
  kv.set("synth.weights", "0.4 0.3 0.2 0.1");
  const PipelineConfig cfg = make_pipeline_config(kv);
  CHECK(cfg.k_range == std::vector<int>{1, 2, 3});
  CHECK(cfg.criterion == Criterion::bic);
  CHECK(cfg.fit.tol == 1e-6);
  CHECK(cfg.fit.restarts == 3);
  CHECK(cfg.fit.seed == 20240101u);
  CHECK(cfg.synth.planted.weights[0] == 0.4);
  CHECK(cfg.config_hash.size() == 16);
  CHECK(make_pipeline_config(kv).config_hash == cfg.config_hash);
  kv.set("seed", "5");
  CHECK(make_pipeline_config(kv).config_hash != cfg.config_hash);
  kv.set("criterion", "icl");
  CHECK_THROWS_AS(make_pipeline_config(kv), InputError);
}

TEST_CASE("grade: two matrices, stage-named failure, byte-identical rerun") {
  const auto dir = fixtures::scratch_dir("pipeline_grade");
  const PipelineConfig cfg = make_pipeline_config(base_config(dir));
  cmd_synth(cfg);
  const CommandResult r = cmd_grade(cfg);
  CHECK(std::filesystem::exists(dir / "grades.csv"));
  CHECK(std::filesystem::exists(dir / "zscores.csv"));
  const auto first = snapshot(dir);
  cmd_grade(cfg);
  CHECK(snapshot(dir) == first);
  CHECK(read_file(dir / "grades.csv").find("seed=20240101 config=" + cfg.config_hash) != std::string::npos);

  PipelineConfig broken = cfg;
  broken.facilities = dir / "nope.csv";
  try {
    cmd_grade(broken);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "load_facilities");
    CHECK(e.exit_code() == 1);
  }
  (void)r;
}

TEST_CASE("sweep on a planted four-component area puts the NEC minimum at four") {
  const auto dir = fixtures::scratch_dir("pipeline_sweep");
  KeyValueConfig kv = base_config(dir);
  kv.set("k_range", "2..6");
  kv.set("restarts", "10");
  const PipelineConfig cfg = make_pipeline_config(kv);
  cmd_synth(cfg);
  cmd_sweep(cfg);
  const CsvTable t = read_csv_file(dir / "selection.csv");
  std::vector<SelectionRow> rows;
  for (const auto& r : t.rows) {
    SelectionRow row;
    row.K = static_cast<int>(*parse_int(r[0]));
    row.nec = parse_double(r[t.column("nec")]);
    rows.push_back(row);
  }
  CHECK(rows.size() == 5);
  CHECK(select(rows, Criterion::nec) == 4);
  CHECK(std::filesystem::exists(dir / "fit_K4.json"));
  const auto before = read_file(dir / "selection.csv");
  cmd_sweep(cfg);
  CHECK(read_file(dir / "selection.csv") == before);
}

TEST_CASE("sweep over K = 1 leaves the NEC column empty") {
  const auto dir = fixtures::scratch_dir("pipeline_k1");
  KeyValueConfig kv = base_config(dir, 2);
  kv.set("k_range", "1");
  const PipelineConfig cfg = make_pipeline_config(kv);
  cmd_synth(cfg);
  cmd_sweep(cfg);
  const CsvTable t = read_csv_file(dir / "selection.csv");
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][t.column("nec")].empty());
  CHECK_FALSE(t.rows[0][t.column("bic")].empty());
}

TEST_CASE("report: polygon classes match label counts and tile the grid") {
  const auto dir = fixtures::scratch_dir("pipeline_report");
  KeyValueConfig kv = base_config(dir);
  kv.set("k_range", "1..4");
  kv.set("criterion", "bic");
  const PipelineConfig cfg = make_pipeline_config(kv);
  cmd_synth(cfg);
  cmd_sweep(cfg);
  cmd_report(cfg);

  const CsvTable labels = read_csv_file(dir / "labels_K4.csv");
  std::map<int, int> label_counts;
  for (const auto& r : labels.rows) ++label_counts[static_cast<int>(*parse_int(r[1]))];
  CHECK(label_counts.size() == 4);

  const auto geo = nlohmann::json::parse(read_file(dir / "map_K4.geojson"));
  CHECK(geo.at("type") == "FeatureCollection");
  CHECK(geo.at("landmix").at("seed") == 20240101u);
  CHECK(geo.at("landmix").at("config_hash") == cfg.config_hash);
  std::map<int, int> polygon_counts;
  std::set<std::pair<double, double>> corners;
  for (const auto& f : geo.at("features")) {
    CHECK(f.at("type") == "Feature");
    const auto& g = f.at("geometry");
    CHECK(g.at("type") == "Polygon");
    const auto& ring = g.at("coordinates").at(0);
    REQUIRE(ring.size() == 5);
    CHECK(ring.front() == ring.back());
    double area2 = 0.0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      area2 += ring[i][0].get<double>() * ring[i + 1][1].get<double>() -
               ring[i + 1][0].get<double>() * ring[i][1].get<double>();
    }
    CHECK(area2 == doctest::Approx(2.0 * 100.0 * 100.0));  // counterclockwise, one cell
    // Axis-aligned unit squares on a lattice have disjoint interiors iff
    // their lower-left corners are distinct.
    CHECK(corners.insert({ring[0][0].get<double>(), ring[0][1].get<double>()}).second);
    const auto& p = f.at("properties");
    for (const char* key : {"cell_id", "component", "land_price", "max_responsibility"}) CHECK(p.contains(key));
    ++polygon_counts[p.at("component").get<int>()];
  }
  CHECK(polygon_counts == label_counts);

  for (const auto& [name, body] : snapshot(dir)) {
    CHECK_MESSAGE(body.find(cfg.config_hash) != std::string::npos, name);
    CHECK_MESSAGE(body.find("20240101") != std::string::npos, name);
  }
}

TEST_CASE("report for a one-component fit draws a single class; missing fits are reported") {
  const auto dir = fixtures::scratch_dir("pipeline_report_k1");
  KeyValueConfig kv = base_config(dir, 2);
  kv.set("k_range", "1");
  kv.set("k", "1");
  const PipelineConfig cfg = make_pipeline_config(kv);
  cmd_synth(cfg);
  cmd_sweep(cfg);
  cmd_report(cfg);
  const auto geo = nlohmann::json::parse(read_file(dir / "map_K1.geojson"));
  std::set<int> classes;
  for (const auto& f : geo.at("features")) classes.insert(f.at("properties").at("component").get<int>());
  CHECK(classes == std::set<int>{1});

  PipelineConfig missing = cfg;
  missing.chosen_k = 3;
  try {
    cmd_report(missing);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "load_fit");
    CHECK(e.exit_code() == 1);
  }
}
