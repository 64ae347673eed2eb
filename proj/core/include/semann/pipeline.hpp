#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "semann/errors.hpp"
#include "semann/ingest.hpp"

namespace semann {

enum class Stage {
  Ingest,
  Screen,
  Describe,
  Anova,
  Measurement,
  Structural,
  Mediation,
  Ann,
  Compare,
};

const char* stage_name(Stage stage);

/// Process exit code for a failure in the given stage (10..18); 0 is
/// success and 64 is reserved for usage errors.
int stage_exit_code(Stage stage);

/// Error raised by run_pipeline, tagged with the stage that failed.
class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& what)
      : Error(std::string(stage_name(stage)) + ": " + what), stage_(stage) {}
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

enum class AnnFeatureSource {
  MeanScores,    // per-construct item means (default)
  FactorScores,  // regression-method scores from the measurement fit
};

struct PipelineConfig {
  std::string data_path;
  std::string model_path;  // empty: use the bundled survey model
  std::string output_dir = "semann-out";

  std::uint64_t seed = 1;
  int bootstrap_replicates = 2000;
  int folds = 10;
  std::array<int, 2> hidden_sizes = {8, 4};
  double significance_threshold = 0.05;  // SEM -> ANN promotion rule
  int workers = 1;
  bool likert_items = true;
  AnnFeatureSource ann_features = AnnFeatureSource::MeanScores;

  /// When true, the time-control and device-limit rules apply only if the
  /// respective metadata columns exist; explicit rules on missing metadata
  /// are then a configuration error only for the dedicated screen command.
  bool screen_auto = true;
  ScreeningRules screening;
};

struct PipelineResult {
  std::vector<std::string> files;  // paths relative to output_dir
  std::vector<std::string> warnings;
  bool completed = false;
};

/// Execute the full two-stage analysis in order: screen, describe, ANOVA
/// battery, measurement fit with reliability and discriminant validity,
/// structural fit with hypothesis and control tables, bootstrap mediation,
/// one network per SEM-significant endogenous target (cross-validation,
/// permutation importance, NRI), and the SEM/ANN ranking comparison.
/// Writes every table to the output directory in text and JSON plus a
/// manifest with content hashes; the manifest is also written when a stage
/// fails, marking completion state. Throws StageError on failure.
PipelineResult run_pipeline(const PipelineConfig& config);

/// FNV-1a 64-bit content hash, hex-encoded (manifest entries).
std::string fnv1a_hex(const std::string& bytes);

}  // namespace semann
