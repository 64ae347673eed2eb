#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "semann/dataset.hpp"
#include "semann/model_spec.hpp"
#include "semann/sem_model.hpp"

namespace semann {

/// Ground-truth generating model for synthetic respondent data.
///
/// `params` follows the layout of SemModel::build(spec, SemMode::Structural).
/// Items are emitted either as raw continuous indicator values or discretized
/// to 1..5 by cutting the standardized indicator score at `item_thresholds`.
/// Covariate columns are always discretized into their declared levels at
/// equal-probability normal quantiles. The outcome is shifted and scaled to
/// a positive seconds range.
struct SynthTruth {
  ModelSpec spec;
  SemParameters params;
  int n = 603;
  std::uint64_t seed = 1;
  bool discretize_items = true;
  std::vector<double> item_thresholds = {-1.5, -0.5, 0.5, 1.5};
  double outcome_location = 5.0;
  double outcome_scale = 1.0;
};

/// Draw a dataset from the truth; deterministic in (seed, n). Rows use
/// per-row derived seeds, so any row-block parallel schedule would produce
/// the same table.
Dataset generate(const SynthTruth& truth);

std::string truth_to_json(const SynthTruth& truth);
SynthTruth truth_from_json(const std::string& text);

/// Assemble standardized generating parameters for a model: items load with
/// the given standardized loadings (error variances 1 - loading^2), the
/// exogenous block takes the given correlation matrix, structural paths take
/// the map values ("target~source" keys, unlisted paths are 0), and
/// disturbance variances are solved so every endogenous latent has unit
/// variance. Throws ValidationError when a latent's explained variance
/// reaches 1 or the exogenous matrix is not positive definite.
SemParameters standardized_parameters(
    const SemModel& model,
    const std::map<std::string, std::vector<double>>& loadings,
    const std::map<std::string, double>& paths,
    const Eigen::MatrixXd& exo_correlations);

}  // namespace semann
