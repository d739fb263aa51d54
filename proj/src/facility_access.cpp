#include "landmix/facility_access.hpp"

#include "landmix/errors.hpp"
#include "landmix/text_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace landmix {

double euclidean_distance(double x1, double y1, double x2, double y2) { return std::hypot(x2 - x1, y2 - y1); }

std::optional<double> nearest_distance(const GridCell& cell, std::span<const FacilityPoint> facilities,
                                       FacilityKind kind, const DistanceMetric& metric) {
  std::optional<double> best;
  for (const FacilityPoint& f : facilities) {
    if (f.kind != kind) continue;
    const double d = metric(cell.centroid_x, cell.centroid_y, f.x, f.y);
    if (!best || d < *best) best = d;
  }
  return best;
}

GradeTable GradeTable::from_thresholds(std::map<FacilityKind, Thresholds> thresholds) {
  for (const auto& [kind, t] : thresholds) {
    const std::string name(to_string(kind));
    for (std::size_t g = 0; g < t.size(); ++g) {
      if (!(t[g] > 0.0) || !std::isfinite(t[g])) {
        throw InputError("grade table '" + name + "': threshold " + std::to_string(g + 1) + " must be positive");
      }
      if (g > 0 && !(t[g] > t[g - 1])) {
        throw InputError("grade table '" + name + "': threshold " + std::to_string(g + 1) + " (" +
                         format_double(t[g]) + ") does not exceed threshold " + std::to_string(g) + " (" +
                         format_double(t[g - 1]) + ")");
      }
    }
  }
  GradeTable table;
  table.thresholds_ = std::move(thresholds);
  return table;
}

GradeTable GradeTable::defaults() {
  // Published walking-distance thresholds. The senior-community grade-9 entry
  // is printed as 49 m, below its own grade 8; 388 m continues the grade 7->8
  // growth ratio (289^2 / 215). Both park kinds share the single park column.
  const Thresholds parks = {156, 265, 438, 761, 1266, 1914, 2734, 3845, 5656, 20627};
  return from_thresholds({
      {FacilityKind::kindergarten, {128, 184, 233, 283, 335, 395, 468, 571, 771, 17116}},
      {FacilityKind::elementary_school, {154, 205, 253, 302, 351, 405, 471, 561, 731, 5897}},
      {FacilityKind::public_library, {253, 448, 758, 1275, 1909, 2637, 3494, 4625, 6522, 27753}},
      {FacilityKind::daycare, {71, 96, 121, 148, 178, 213, 257, 312, 404, 19632}},
      {FacilityKind::senior_community, {58, 75, 92, 112, 137, 169, 215, 289, 388, 9486}},
      {FacilityKind::senior_education, {378, 628, 953, 1449, 2217, 3369, 5352, 8465, 13386, 87815}},
      {FacilityKind::health_facility, {150, 280, 518, 932, 1481, 2163, 3006, 4146, 6169, 28088}},
      {FacilityKind::neighborhood_park, parks},
      {FacilityKind::public_park, parks},
  });
}

GradeTable GradeTable::parse(std::istream& in) {
  const KeyValueConfig cfg = KeyValueConfig::parse(in);
  std::map<FacilityKind, Thresholds> thresholds;
  for (const auto& [key, value] : cfg.values()) {
    const auto kind = parse_facility_kind(key);
    if (!kind) throw UnknownFacilityKind(key);
    const auto numbers = parse_number_list(value, "grade table '" + key + "'");
    if (numbers.size() != kGradeThresholds) {
      throw InputError("grade table '" + key + "': expected 10 thresholds, got " + std::to_string(numbers.size()));
    }
    Thresholds t{};
    std::copy(numbers.begin(), numbers.end(), t.begin());
    thresholds[*kind] = t;
  }
  for (FacilityKind k : kAllFacilityKinds) {
    if (!thresholds.count(k)) throw InputError("grade table: missing kind '" + std::string(to_string(k)) + "'");
  }
  return from_thresholds(std::move(thresholds));
}

GradeTable GradeTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open grade table '" + path.string() + "'");
  return parse(in);
}

const GradeTable::Thresholds& GradeTable::thresholds(FacilityKind kind) const {
  const auto it = thresholds_.find(kind);
  if (it == thresholds_.end()) throw UnknownFacilityKind(std::string(to_string(kind)));
  return it->second;
}

std::string GradeTable::to_text() const {
  std::string out;
  for (const auto& [kind, t] : thresholds_) {
    out += to_string(kind);
    out += " =";
    for (double v : t) {
      out += ' ';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

int grade_of(std::optional<double> distance, FacilityKind kind, const GradeTable& table) {
  const auto& t = table.thresholds(kind);
  if (!distance) return kWorstGrade;
  for (std::size_t g = 0; g < t.size(); ++g) {
    if (*distance <= t[g]) return static_cast<int>(g) + 1;
  }
  return kWorstGrade;
}

GradeMatrix grade_all(const StudyArea& area, const GradeTable& table, const DistanceMetric& metric) {
  for (FacilityKind k : kAllFacilityKinds) table.thresholds(k);

  GradeMatrix out;
  for (const GridCell& cell : area.cells) {
    if (!is_modelable(cell)) continue;
    std::array<int, kFacilityKindCount> row{};
    for (FacilityKind k : kAllFacilityKinds) {
      row[index_of(k)] = grade_of(nearest_distance(cell, area.facilities, k, metric), k, table);
    }
    out.cell_ids.push_back(cell.id);
    out.grades.push_back(row);
  }
  return out;
}

Eigen::MatrixXd ZScoreMatrix::recompose() const {
  Eigen::MatrixXd out(values.rows(), values.cols());
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    out.col(j) = (values.col(j).array() * sd[j] + mean[j]).matrix();
  }
  return out;
}

ZScoreMatrix standardize(const GradeMatrix& grades) {
  const std::size_t n = grades.rows();
  if (n < 2) throw InputError("standardization needs at least two rows");

  ZScoreMatrix z;
  z.cell_ids = grades.cell_ids;
  z.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kFacilityKindCount));
  for (std::size_t j = 0; j < kFacilityKindCount; ++j) {
    double sum = 0.0;
    for (const auto& row : grades.grades) sum += row[j];
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& row : grades.grades) ss += (row[j] - mean) * (row[j] - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw ConstantColumn(std::string(to_string(kAllFacilityKinds[j])));
    z.mean[j] = mean;
    z.sd[j] = sd;
    for (std::size_t i = 0; i < n; ++i) {
      z.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (grades.grades[i][j] - mean) / sd;
    }
  }
  return z;
}

namespace {

std::string kind_header() {
  std::string out = "cell_id";
  for (FacilityKind k : kAllFacilityKinds) {
    out += ',';
    out += to_string(k);
  }
  out += '\n';
  return out;
}

}  // namespace

std::string grades_to_csv(const GradeMatrix& grades) {
  std::string out = kind_header();
  for (std::size_t i = 0; i < grades.rows(); ++i) {
    out += grades.cell_ids[i];
    for (int g : grades.grades[i]) {
      out += ',';
      out += std::to_string(g);
    }
    out += '\n';
  }
  return out;
}

std::string zscores_to_csv(const ZScoreMatrix& z) {
  std::string out = kind_header();
  for (std::size_t i = 0; i < z.rows(); ++i) {
    out += z.cell_ids[i];
    for (Eigen::Index j = 0; j < z.values.cols(); ++j) {
      out += ',';
      out += format_double(z.values(static_cast<Eigen::Index>(i), j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace landmix
