#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "semann/model_spec.hpp"

namespace semann {

/// Canonical in-memory survey table shared by all analysis stages.
///
/// Immutable by convention once built: every stage takes `const Dataset&`
/// and derived sets are produced by copying (see select_rows), so instances
/// can be shared read-only across parallel workers.
struct Dataset {
  std::vector<std::string> respondent_ids;  // one per row

  std::vector<std::string> item_names;  // column order of `items`
  Eigen::MatrixXd items;                // N x items; Likert data holds 1..5

  std::vector<ControlField> demographic_fields;
  Eigen::MatrixXi demographics;  // N x fields; level codes (index into levels)

  std::string outcome_name;  // empty when the model declares no outcome
  Eigen::VectorXd outcome;   // seconds, > 0

  bool has_completion = false;
  std::vector<double> completion_seconds;
  bool has_source = false;
  std::vector<std::string> source_address;

  Eigen::Index n_rows() const { return items.rows(); }

  int item_index(const std::string& name) const;
  int demographic_index(const std::string& name) const;

  /// Column of integer level codes as doubles (for use as a regressor).
  Eigen::VectorXd demographic_values(const std::string& name) const;

  /// Row-subset copy; `rows` may repeat indices (bootstrap resampling).
  Dataset select_rows(const std::vector<int>& rows) const;
};

}  // namespace semann
