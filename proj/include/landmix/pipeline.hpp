#pragma once

// Subcommand orchestration: ingestion -> grading -> fitting -> selection ->
// reports, plus the synthetic study-area generator.

#include "landmix/errors.hpp"
#include "landmix/mixreg.hpp"
#include "landmix/model_select.hpp"
#include "landmix/synth.hpp"
#include "landmix/text_io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace landmix {

struct PipelineConfig {
  std::filesystem::path cells;
  std::filesystem::path facilities;
  std::filesystem::path grade_table;  // empty: built-in schedule
  std::vector<int> k_range{2, 3, 4, 5, 6};
  FitConfig fit;
  Criterion criterion = Criterion::nec;
  std::filesystem::path out_dir = "out";
  std::optional<int> chosen_k;
  SynthSpec synth;
  std::string config_hash;  // 16 hex digits over the canonical key/value text
};

// "2..6", "1,2,4" or a single integer.
std::vector<int> parse_k_range(const std::string& text);

// Recognized keys: cells, facilities, grade_table, out, k_range, k,
// criterion, seed, tol, max_iter, restarts, variance_floor,
// min_variance_ratio, residual_start and the synth.*
// family (cols, cells, cell_size, k, separation, sigma, slope_jitter, noise,
// facilities, weights, sigma2, beta.<k>).
PipelineConfig make_pipeline_config(const KeyValueConfig& kv);

// Error raised by a subcommand, tagged with the stage that failed.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, int exit_code)
      : Error("stage '" + stage + "' failed: " + what, exit_code), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct CommandResult {
  std::vector<std::filesystem::path> written;
  std::string summary;  // human-readable lines for stdout
};

CommandResult cmd_grade(const PipelineConfig& cfg);
// Exit-code semantics: throws StageError when no K in the range fits.
CommandResult cmd_sweep(const PipelineConfig& cfg);
// Uses cfg.chosen_k, or the criterion minimum from the sweep's selection CSV.
CommandResult cmd_report(const PipelineConfig& cfg);
CommandResult cmd_synth(const PipelineConfig& cfg);

// FeatureCollection of square cell polygons with per-cell fit properties.
std::string cells_to_geojson(const StudyArea& area, const Dataset& data, const MixtureFit& fit,
                             std::uint64_t seed, const std::string& config_hash);

}  // namespace landmix
