#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semann/dataset.hpp"
#include "semann/model_spec.hpp"

namespace semann {

struct MediationOptions {
  int replicates = 2000;  // >= 200
  double level = 0.95;    // percentile CI level for classification
  std::uint64_t seed = 1;
  int workers = 1;
};

struct MediationRecord {
  std::string source;
  std::string mediator;
  std::string target;

  // standardized full-data point estimates
  double direct = 0.0;
  double indirect = 0.0;  // product of the two constituent paths

  // percentile bootstrap intervals at MediationOptions::level
  double direct_lo = 0.0, direct_hi = 0.0;
  double indirect_lo = 0.0, indirect_hi = 0.0;

  // stars: highest of {99.9, 99, 95}% whose percentile CI excludes zero
  std::string direct_stars;
  std::string indirect_stars;

  std::string classification;  // "none" | "partial" | "full"
  bool degenerate_ci = false;  // zero-width interval
};

struct MediationRun {
  std::vector<MediationRecord> records;
  int replicates_requested = 0;
  int replicates_used = 0;
  std::vector<std::string> warnings;
};

/// Nonparametric bootstrap of direct and indirect effects. Respondent rows
/// are resampled with replacement, the structural model is refit per
/// replicate (warm-started from the full-data solution), and percentile
/// intervals are taken over the replicate effects. Replicates that fail to
/// converge are dropped and counted; > 10% failures warns, > 50% is an
/// error. Deterministic given the seed, independent of worker count.
///
/// Every chain must name fitted paths: source->mediator, mediator->target,
/// and the direct path source->target.
MediationRun bootstrap_mediation(const ModelSpec& spec, const Dataset& data,
                                 const std::vector<MediationChain>& chains,
                                 const MediationOptions& options = {});

}  // namespace semann
