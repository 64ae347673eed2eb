#pragma once

#include <string>
#include <vector>

#include "semann/importance.hpp"
#include "semann/mediation.hpp"
#include "semann/psychometrics.hpp"
#include "semann/sem_fit.hpp"
#include "semann/stats.hpp"

namespace semann::report {

/// Every table is emitted twice: an aligned text rendering and a JSON
/// document (the machine contract; key order is fixed so reruns are
/// byte-identical).

std::string descriptives_text(
    const std::vector<std::pair<std::string, FrequencyTable>>& demographics,
    const std::string& outcome_name, const OutcomeDescriptives& outcome);
std::string descriptives_json(
    const std::vector<std::pair<std::string, FrequencyTable>>& demographics,
    const std::string& outcome_name, const OutcomeDescriptives& outcome);

struct AnovaRow {
  std::string factor;
  std::string dependent;
  AnovaResult result;
};

std::string anova_text(const std::vector<AnovaRow>& rows);
std::string anova_json(const std::vector<AnovaRow>& rows);

struct ReliabilityRow {
  std::string construct;
  std::vector<std::string> items;
  std::vector<double> loadings;  // standardized
  std::vector<std::string> loading_stars;
  double alpha = 0.0;
  double ave = 0.0;
  double cr = 0.0;
};

std::string reliability_text(const std::vector<ReliabilityRow>& rows);
std::string reliability_json(const std::vector<ReliabilityRow>& rows);

std::string discriminant_text(const DiscriminantMatrix& matrix);
std::string discriminant_json(const DiscriminantMatrix& matrix);

std::string fit_indices_text(const FitIndices& fit);

/// Full SemFit document: fit block with pass flags, convergence
/// diagnostics, estimates with SE/z/p/stars/standardized, latent
/// correlations, and warnings.
std::string sem_fit_json(const SemFit& fit);
std::string estimates_text(const SemFit& fit);

std::string hypotheses_text(const std::vector<HypothesisResult>& rows);
std::string hypotheses_json(const std::vector<HypothesisResult>& rows);

struct ControlEffectRow {
  std::string target;
  std::string control;
  double estimate = 0.0;  // standardized
  double p = 1.0;
  std::string stars;
};

/// Covariate paths extracted from a structural fit.
std::vector<ControlEffectRow> control_effects(const SemFit& fit);
std::string control_effects_text(const std::vector<ControlEffectRow>& rows);
std::string control_effects_json(const std::vector<ControlEffectRow>& rows);

std::string mediation_text(const MediationRun& run);
std::string mediation_json(const MediationRun& run);

std::string cv_text(const std::string& target, const CvResult& cv);
std::string cv_json(const std::string& target, const CvResult& cv);

std::string importance_text(const std::string& target,
                            const ImportanceReport& report);
std::string importance_json(const std::string& target,
                            const ImportanceReport& report);

struct ComparisonSection {
  std::string target;
  std::vector<ComparisonRow> rows;
};

std::string comparison_text(const std::vector<ComparisonSection>& sections);
std::string comparison_json(const std::vector<ComparisonSection>& sections);

// shared formatting helpers
std::string fixed(double v, int decimals);
std::string percent(double fraction, int decimals = 2);  // 0.2454 -> "24.54%"
std::string p_value_text(double p);

}  // namespace semann::report
