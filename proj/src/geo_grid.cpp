#include "landmix/geo_grid.hpp"

#include "landmix/errors.hpp"
#include "landmix/text_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace landmix {

namespace {

double field_value(const CsvTable& table, std::size_t row, std::size_t col) {
  const auto& fields = table.rows[row];
  const std::string& name = table.header[col];
  if (col >= fields.size()) throw ParseError(row + 1, name, "");
  const auto v = parse_double(fields[col]);
  if (!v) throw ParseError(row + 1, name, fields[col]);
  if (!std::isfinite(*v)) throw InvariantViolation(row + 1, name, "value must be finite");
  return *v;
}

void check_rate(std::size_t row, const std::string& field, double v) {
  if (v < 0.0 || v > 1.0) {
    throw InvariantViolation(row, field, "rate " + format_double(v) + " outside [0,1]");
  }
}

void check_nonnegative(std::size_t row, const std::string& field, double v) {
  if (v < 0.0) throw InvariantViolation(row, field, "value " + format_double(v) + " is negative");
}

}  // namespace

StudyArea make_study_area(std::vector<GridCell> cells, std::vector<FacilityPoint> facilities, double cell_size_m) {
  if (cells.empty()) throw InputError("study area needs at least one cell");
  if (!(cell_size_m > 0.0)) throw InputError("cell size must be positive");
  return StudyArea{std::move(cells), std::move(facilities), cell_size_m};
}

std::vector<GridCell> read_cells(std::istream& in, const CellSchema& schema) {
  const CsvTable table = read_csv(in);
  const std::size_t c_id = table.column(schema.id);
  const std::size_t c_x = table.column(schema.x);
  const std::size_t c_y = table.column(schema.y);
  const std::size_t c_pop = table.column(schema.population);
  const std::size_t c_female = table.column(schema.female_rate);
  const std::size_t c_public = table.column(schema.public_land_rate);
  const std::size_t c_green = table.column(schema.green_rate);
  const std::size_t c_comm = table.column(schema.commercial_rate);
  const std::size_t c_price = table.column(schema.land_price);

  std::vector<GridCell> cells;
  cells.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::size_t row = r + 1;
    if (c_id >= table.rows[r].size() || table.rows[r][c_id].empty()) throw ParseError(row, schema.id, "");
    GridCell cell;
    cell.id = table.rows[r][c_id];
    cell.centroid_x = field_value(table, r, c_x);
    cell.centroid_y = field_value(table, r, c_y);
    cell.population = field_value(table, r, c_pop);
    cell.female_rate = field_value(table, r, c_female);
    cell.public_land_rate = field_value(table, r, c_public);
    cell.green_rate = field_value(table, r, c_green);
    cell.commercial_rate = field_value(table, r, c_comm);
    cell.land_price = field_value(table, r, c_price);

    check_nonnegative(row, schema.population, cell.population);
    check_nonnegative(row, schema.land_price, cell.land_price);
    check_rate(row, schema.female_rate, cell.female_rate);
    check_rate(row, schema.public_land_rate, cell.public_land_rate);
    check_rate(row, schema.green_rate, cell.green_rate);
    check_rate(row, schema.commercial_rate, cell.commercial_rate);
    cells.push_back(std::move(cell));
  }
  return cells;
}

std::vector<GridCell> load_cells(const std::filesystem::path& path, const CellSchema& schema) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open cell file '" + path.string() + "'");
  return read_cells(in, schema);
}

std::vector<FacilityPoint> read_facilities(std::istream& in) {
  const CsvTable table = read_csv(in);
  const std::size_t c_kind = table.column("kind");
  const std::size_t c_x = table.column("x");
  const std::size_t c_y = table.column("y");

  std::vector<FacilityPoint> points;
  points.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& fields = table.rows[r];
    const std::string raw_kind = c_kind < fields.size() ? fields[c_kind] : std::string();
    const auto kind = parse_facility_kind(raw_kind);
    if (!kind) throw UnknownFacilityKind(r + 1, raw_kind);
    points.push_back(FacilityPoint{*kind, field_value(table, r, c_x), field_value(table, r, c_y)});
  }
  return points;
}

std::vector<FacilityPoint> load_facilities(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open facility file '" + path.string() + "'");
  return read_facilities(in);
}

std::string cells_to_csv(std::span<const GridCell> cells) {
  std::string out = "id,x,y,population,female_rate,public_land_rate,green_rate,commercial_rate,land_price\n";
  for (const GridCell& c : cells) {
    out += c.id;
    for (double v : {c.centroid_x, c.centroid_y, c.population, c.female_rate, c.public_land_rate, c.green_rate,
                     c.commercial_rate, c.land_price}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::string facilities_to_csv(std::span<const FacilityPoint> facilities) {
  std::string out = "kind,x,y\n";
  for (const FacilityPoint& f : facilities) {
    out += to_string(f.kind);
    out += ',';
    out += format_double(f.x);
    out += ',';
    out += format_double(f.y);
    out += '\n';
  }
  return out;
}

ValidationReport validate_area(const StudyArea& area) {
  ValidationReport report;
  std::map<std::string, int> seen;
  for (const GridCell& cell : area.cells) {
    if (!is_modelable(cell)) report.excluded_cells.push_back(cell.id);
    if (++seen[cell.id] == 2) report.duplicate_ids.push_back(cell.id);
  }
  std::set<FacilityKind> present;
  for (const FacilityPoint& f : area.facilities) present.insert(f.kind);
  for (FacilityKind k : kAllFacilityKinds) {
    if (!present.count(k)) report.missing_kinds.push_back(k);
  }
  return report;
}

std::vector<std::string> ValidationReport::messages() const {
  std::vector<std::string> out;
  for (const auto& id : excluded_cells) out.push_back("cell '" + id + "' has zero population or land price; excluded");
  for (const auto& id : duplicate_ids) out.push_back("duplicate cell id '" + id + "'");
  for (FacilityKind k : missing_kinds) out.push_back("kind '" + std::string(to_string(k)) + "' has zero points");
  return out;
}

}  // namespace landmix
