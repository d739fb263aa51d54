#pragma once

#include "landmix/facility_access.hpp"
#include "landmix/geo_grid.hpp"
#include "landmix/mixreg.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace landmix {

// Planted mixture-of-regressions ground truth plus the study-area geometry
// it is generated on.
struct SynthSpec {
  int grid_cols = 30;
  int n_cells = 904;  // cells fill the grid row-major; the last row may be partial
  double cell_size_m = 100.0;
  double origin_x = 0.0;
  double origin_y = 0.0;

  MixtureParams planted;  // betas are (kDesignColumns x K)
  double noise_scale = 1.0;  // multiplies every planted standard deviation

  std::array<int, kFacilityKindCount> facility_counts = {40, 12, 4, 80, 60, 3, 6, 25, 8};
  std::uint64_t seed = 1;

  int K() const { return planted.K(); }
  // Throws InvalidSpec.
  void validate() const;
};

// Planted parameters with decreasing weights, component means `separation`
// standard deviations apart around `base_intercept` at the expected covariate
// point of synth_dataset, shared slopes plus
// per-component jitter in [-slope_jitter, slope_jitter]. Every planted
// coefficient has magnitude >= 0.2. Deterministic in `seed`.
MixtureParams planted_params(int K, double separation, double sigma, double slope_jitter, std::uint64_t seed,
                             double base_intercept = 18.0);

struct PlantedTruth {
  MixtureParams params;
  std::vector<std::string> cell_ids;
  std::vector<int> membership;  // 0-based planted component per row / cell
};

struct SynthDataset {
  Dataset data;
  PlantedTruth truth;
};

// Direct design-matrix draw: SOC columns standard normal, population
// log-normal, rates Beta. No geometry involved.
SynthDataset synth_dataset(const SynthSpec& spec);

struct SynthArea {
  StudyArea area;
  PlantedTruth truth;
};

// Grid cells and facilities; ln(price) is generated from the SOC z-scores
// the grading stage will recompute from the placed facilities.
SynthArea synth_generate(const SynthSpec& spec, const GradeTable& table = GradeTable::defaults());

std::string truth_to_json(const PlantedTruth& truth, std::uint64_t seed);

}  // namespace landmix
