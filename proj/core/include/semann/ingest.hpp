#pragma once

#include <string>
#include <vector>

#include "semann/dataset.hpp"
#include "semann/model_spec.hpp"

namespace semann {

struct LoadOptions {
  /// When true (the survey contract), every item cell must be an integer in
  /// [1, 5]. Simulator output in continuous mode is loaded with this off.
  bool likert_items = true;
};

struct LoadResult {
  Dataset data;
  std::vector<std::string> warnings;  // e.g. ignored unknown columns
};

/// Load a survey CSV against the model's schema. Required columns: every
/// item named in the measurement map, every declared control, and the
/// outcome (when declared). Optional: respondent_id, completion_seconds,
/// source_address. Undeclared extra columns are ignored with a warning.
LoadResult load_csv(const std::string& path, const ModelSpec& spec,
                    const LoadOptions& options = {});

/// Same, parsing in-memory text (test seam).
LoadResult load_csv_text(const std::string& text, const ModelSpec& spec,
                         const LoadOptions& options = {});

std::string to_csv_text(const Dataset& data);
void save_csv(const std::string& path, const Dataset& data);

/// Logical-consistency predicate: a row is excluded when `field` holds
/// `level` and `conflicting_field` holds `conflicting_level` simultaneously.
struct ConsistencyRule {
  std::string name;  // reported in the exclusion log
  std::string field;
  std::string level;
  std::string conflicting_field;
  std::string conflicting_level;
};

struct ScreeningRules {
  /// Rows with completion_seconds below this are excluded ("time control").
  /// A threshold of 0 disables the rule. Must be >= 0.
  double min_completion_seconds = 80.0;
  /// Keep only the first row per source_address ("device limit").
  bool dedupe_by_source = true;
  /// Declarative checks ("response verification").
  std::vector<ConsistencyRule> consistency;
};

struct Exclusion {
  int row_index;  // 0-based index into the input dataset
  std::string respondent_id;
  std::string rule;
};

struct ScreenResult {
  Dataset data;               // surviving rows, input order preserved
  std::vector<Exclusion> log;  // one entry per excluded row
};

/// Apply quality-control rules. Metadata required by an enabled rule must be
/// present, otherwise a ConfigError names the missing column.
ScreenResult screen(const Dataset& data, const ScreeningRules& rules);

/// Exclusion log as CSV with columns (row_index, respondent_id, rule).
std::string exclusion_log_csv(const std::vector<Exclusion>& log);

}  // namespace semann
