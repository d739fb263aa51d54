#pragma once

#include "landmix/facility_kind.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace landmix {

// One analysis cell. Coordinates are planar meters in whatever projected
// frame the caller uses; no reprojection happens here.
struct GridCell {
  std::string id;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  double population = 0.0;
  double female_rate = 0.0;
  double public_land_rate = 0.0;
  double green_rate = 0.0;
  double commercial_rate = 0.0;
  double land_price = 0.0;

  bool operator==(const GridCell&) const = default;
};

struct FacilityPoint {
  FacilityKind kind = FacilityKind::kindergarten;
  double x = 0.0;
  double y = 0.0;

  bool operator==(const FacilityPoint&) const = default;
};

struct StudyArea {
  std::vector<GridCell> cells;
  std::vector<FacilityPoint> facilities;
  double cell_size_m = 100.0;

  bool operator==(const StudyArea&) const = default;
};

// Throws InputError when the area has no cells or a non-positive cell size.
StudyArea make_study_area(std::vector<GridCell> cells, std::vector<FacilityPoint> facilities,
                          double cell_size_m = 100.0);

// Cells need strictly positive price and population to enter the log model.
inline bool is_modelable(const GridCell& cell) { return cell.population > 0.0 && cell.land_price > 0.0; }

// Logical field -> header name in the input file.
struct CellSchema {
  std::string id = "id";
  std::string x = "x";
  std::string y = "y";
  std::string population = "population";
  std::string female_rate = "female_rate";
  std::string public_land_rate = "public_land_rate";
  std::string green_rate = "green_rate";
  std::string commercial_rate = "commercial_rate";
  std::string land_price = "land_price";
};

std::vector<GridCell> load_cells(const std::filesystem::path& path, const CellSchema& schema = {});
std::vector<GridCell> read_cells(std::istream& in, const CellSchema& schema = {});
std::vector<FacilityPoint> load_facilities(const std::filesystem::path& path);
std::vector<FacilityPoint> read_facilities(std::istream& in);

// Header plus one line per record, default schema, round-trip number format.
std::string cells_to_csv(std::span<const GridCell> cells);
std::string facilities_to_csv(std::span<const FacilityPoint> facilities);

struct ValidationReport {
  std::vector<std::string> excluded_cells;  // population == 0 or land_price == 0
  std::vector<std::string> duplicate_ids;
  std::vector<FacilityKind> missing_kinds;

  bool empty() const { return excluded_cells.empty() && duplicate_ids.empty() && missing_kinds.empty(); }
  std::vector<std::string> messages() const;
  bool operator==(const ValidationReport&) const = default;
};

ValidationReport validate_area(const StudyArea& area);

}  // namespace landmix
