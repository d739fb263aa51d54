#include "fixtures.hpp"
#include "landmix/errors.hpp"
#include "landmix/geo_grid.hpp"
#include "landmix/text_io.hpp"
#include "landmix/synth.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace landmix;

namespace {

const char* kHeader = "id,x,y,population,female_rate,public_land_rate,green_rate,commercial_rate,land_price\n";

GridCell cell(std::string id, double price, double pop = 100.0) {
  GridCell c;
  c.id = std::move(id);
  c.population = pop;
  c.female_rate = 0.5;
  c.land_price = price;
  return c;
}

}  // namespace

TEST_CASE("three well-formed rows load as three cells") {
  std::istringstream in(std::string(kHeader) +
                        "a,50,50,10,0.5,0.1,0.0,0.2,1000\n"
                        "b,150,50,0,0.4,0.2,0.1,0.0,0\n"
                        "c,250,50,7,1,0,1,0,12.5\n");
  const auto cells = read_cells(in);
  REQUIRE(cells.size() == 3);
  CHECK(cells[0].id == "a");
  CHECK(cells[1].centroid_x == 150.0);
  CHECK(cells[2].land_price == 12.5);
}

TEST_CASE("a rate above one is rejected with its row index") {
  std::istringstream in(std::string(kHeader) + "a,0,0,1,0.5,0,0,0,1\nb,0,0,1,1.2,0,0,0,1\n");
  try {
    read_cells(in);
    FAIL("expected InvariantViolation");
  } catch (const InvariantViolation& e) {
    CHECK(e.row() == 2);
    CHECK(e.field() == "female_rate");
  }
}

TEST_CASE("negative price, unparsable numbers and missing columns are rejected") {
  std::istringstream neg(std::string(kHeader) + "a,0,0,1,0.5,0,0,0,-3\n");
  CHECK_THROWS_AS(read_cells(neg), InvariantViolation);
  std::istringstream junk(std::string(kHeader) + "a,0,zero,1,0.5,0,0,0,3\n");
  try {
    read_cells(junk);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 1);
    CHECK(e.column() == "y");
  }
  std::istringstream missing("id,x,y\na,0,0\n");
  CHECK_THROWS_AS(read_cells(missing), MissingColumn);
}

TEST_CASE("a custom schema maps renamed columns") {
  CellSchema schema;
  schema.land_price = "price";
  schema.id = "cell";
  std::istringstream in("cell,x,y,population,female_rate,public_land_rate,green_rate,commercial_rate,price\n"
                        "q,1,2,3,0.5,0,0,0,9\n");
  const auto cells = read_cells(in, schema);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].id == "q");
  CHECK(cells[0].land_price == 9.0);
}

TEST_CASE("facility rows parse known kinds and reject unknown ones") {
  std::istringstream ok("kind,x,y\nkindergarten,1,2\npublic_park,3,4\n");
  const auto pts = read_facilities(ok);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].kind == FacilityKind::kindergarten);
  CHECK(pts[1].kind == FacilityKind::public_park);
  std::istringstream bad("kind,x,y\nkindergarten,1,2\ncasino,0,0\n");
  try {
    read_facilities(bad);
    FAIL("expected UnknownFacilityKind");
  } catch (const UnknownFacilityKind& e) {
    CHECK(e.row() == 2);
    CHECK(e.value() == "casino");
  }
}

TEST_CASE("validation flags zero price, duplicates and kinds without points") {
  std::vector<FacilityPoint> all;
  for (FacilityKind k : kAllFacilityKinds) all.push_back({k, 0.0, 0.0});
  const StudyArea clean = make_study_area({cell("a", 5.0), cell("b", 6.0)}, all);
  CHECK(validate_area(clean).empty());

  const StudyArea zero = make_study_area({cell("a", 5.0), cell("b", 0.0)}, all);
  CHECK(validate_area(zero).excluded_cells == std::vector<std::string>{"b"});

  std::vector<FacilityPoint> no_parks;
  for (const auto& f : all) {
    if (f.kind != FacilityKind::neighborhood_park && f.kind != FacilityKind::public_park) no_parks.push_back(f);
  }
  const ValidationReport r = validate_area(make_study_area({cell("a", 5.0), cell("a", 6.0)}, no_parks));
  CHECK(r.missing_kinds.size() == 2);
  CHECK(r.duplicate_ids == std::vector<std::string>{"a"});
  CHECK(r.messages().size() == 3);
  CHECK(validate_area(zero) == validate_area(zero));
}

TEST_CASE("an empty area or non-positive cell size is rejected") {
  CHECK_THROWS_AS(make_study_area({}, {}), InputError);
  CHECK_THROWS_AS(make_study_area({cell("a", 1.0)}, {}, 0.0), InputError);
}

TEST_CASE("the 904-cell generated fixture loads back identically with all nine kinds") {
  SynthSpec spec;
  spec.seed = 11;
  spec.planted = planted_params(4, 8.0, 0.05, 0.01, spec.seed);
  const SynthArea s = synth_generate(spec);

  const auto dir = fixtures::scratch_dir("geo_roundtrip");
  write_file_atomic(dir / "cells.csv", cells_to_csv(s.area.cells));
  write_file_atomic(dir / "facilities.csv", facilities_to_csv(s.area.facilities));
  const auto cells = load_cells(dir / "cells.csv");
  const auto facilities = load_facilities(dir / "facilities.csv");
  CHECK(cells.size() == 904);
  CHECK(cells == s.area.cells);
  CHECK(facilities == s.area.facilities);
  std::set<FacilityKind> kinds;
  for (const auto& f : facilities) kinds.insert(f.kind);
  CHECK(kinds.size() == 9);
}
