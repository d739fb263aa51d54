#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace landmix {

// The nine public-facility kinds. Declaration order is the column order of
// every grade / z-score matrix and of the SOC block in the design matrix.
enum class FacilityKind : std::uint8_t {
  kindergarten,
  elementary_school,
  public_library,
  daycare,
  senior_community,
  senior_education,
  health_facility,
  neighborhood_park,
  public_park,
};

inline constexpr std::size_t kFacilityKindCount = 9;

inline constexpr std::array<FacilityKind, kFacilityKindCount> kAllFacilityKinds = {
    FacilityKind::kindergarten,     FacilityKind::elementary_school, FacilityKind::public_library,
    FacilityKind::daycare,          FacilityKind::senior_community,  FacilityKind::senior_education,
    FacilityKind::health_facility,  FacilityKind::neighborhood_park, FacilityKind::public_park,
};

constexpr std::size_t index_of(FacilityKind kind) { return static_cast<std::size_t>(kind); }

constexpr std::string_view to_string(FacilityKind kind) {
  switch (kind) {
    case FacilityKind::kindergarten: return "kindergarten";
    case FacilityKind::elementary_school: return "elementary_school";
    case FacilityKind::public_library: return "public_library";
    case FacilityKind::daycare: return "daycare";
    case FacilityKind::senior_community: return "senior_community";
    case FacilityKind::senior_education: return "senior_education";
    case FacilityKind::health_facility: return "health_facility";
    case FacilityKind::neighborhood_park: return "neighborhood_park";
    case FacilityKind::public_park: return "public_park";
  }
  return "";
}

constexpr std::optional<FacilityKind> parse_facility_kind(std::string_view name) {
  for (FacilityKind k : kAllFacilityKinds) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

}  // namespace landmix
