#pragma once

#include "landmix/facility_kind.hpp"
#include "landmix/geo_grid.hpp"

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace landmix {

// Grade assigned when the nearest facility lies beyond the last threshold,
// or when the kind has no facilities at all.
inline constexpr int kWorstGrade = 11;
inline constexpr std::size_t kGradeThresholds = 10;

// Symmetric, nonnegative distance between two planar points.
using DistanceMetric = std::function<double(double x1, double y1, double x2, double y2)>;

double euclidean_distance(double x1, double y1, double x2, double y2);

// Minimum distance from the cell centroid to any facility of `kind`;
// std::nullopt when the kind has no facilities.
std::optional<double> nearest_distance(const GridCell& cell, std::span<const FacilityPoint> facilities,
                                       FacilityKind kind, const DistanceMetric& metric = euclidean_distance);

// Per-kind ascending maximum distances (meters) for grades 1..10.
class GradeTable {
 public:
  using Thresholds = std::array<double, kGradeThresholds>;

  GradeTable() = default;

  // Validates positivity and strict increase. Kinds may be omitted; grading
  // an omitted kind throws UnknownFacilityKind.
  static GradeTable from_thresholds(std::map<FacilityKind, Thresholds> thresholds);

  // Walking-distance schedule shipped with the toolkit; see
  // data/default_grade_table.cfg for provenance of each column.
  static GradeTable defaults();

  // `kind_name = t1 t2 ... t10` per line; all nine kinds required.
  static GradeTable parse(std::istream& in);
  static GradeTable load(const std::filesystem::path& path);

  bool has(FacilityKind kind) const { return thresholds_.count(kind) != 0; }
  const Thresholds& thresholds(FacilityKind kind) const;
  std::string to_text() const;

  bool operator==(const GradeTable&) const = default;

 private:
  std::map<FacilityKind, Thresholds> thresholds_;
};

// Smallest grade g with distance <= threshold[g]; 11 past the last one.
int grade_of(std::optional<double> distance, FacilityKind kind, const GradeTable& table);

// Rows follow the modelable cells of the area in input order.
struct GradeMatrix {
  std::vector<std::string> cell_ids;
  std::vector<std::array<int, kFacilityKindCount>> grades;

  std::size_t rows() const { return cell_ids.size(); }
  bool operator==(const GradeMatrix&) const = default;
};

GradeMatrix grade_all(const StudyArea& area, const GradeTable& table,
                      const DistanceMetric& metric = euclidean_distance);

struct ZScoreMatrix {
  std::vector<std::string> cell_ids;
  Eigen::MatrixXd values;  // rows x 9
  std::array<double, kFacilityKindCount> mean{};
  std::array<double, kFacilityKindCount> sd{};

  std::size_t rows() const { return cell_ids.size(); }
  // Undo the standardization: value * sd + mean.
  Eigen::MatrixXd recompose() const;
};

// Column-wise (x - mean) / sample SD. Throws ConstantColumn, or InputError
// with fewer than two rows.
ZScoreMatrix standardize(const GradeMatrix& grades);

std::string grades_to_csv(const GradeMatrix& grades);
std::string zscores_to_csv(const ZScoreMatrix& z);

}  // namespace landmix
