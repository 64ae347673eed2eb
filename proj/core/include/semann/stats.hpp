#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "semann/dataset.hpp"
#include "semann/model_spec.hpp"

namespace semann {

struct FrequencyBin {
  std::string label;
  long count = 0;
};

struct FrequencyTable {
  std::vector<FrequencyBin> bins;
  long total = 0;
};

struct OutcomeDescriptives {
  FrequencyTable freq;
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation (divide by N)
};

/// Frequency table plus mean and population SD of the outcome column.
/// Bins are the distinct observed values; when there are more than
/// `max_distinct_bins` of them, values are binned to the nearest integer.
OutcomeDescriptives describe_outcome(const Dataset& data,
                                     int max_distinct_bins = 25);

/// Per-field level frequency tables for all demographic fields.
std::vector<std::pair<std::string, FrequencyTable>> describe_demographics(
    const Dataset& data);

struct AnovaResult {
  double f = 0.0;
  int df1 = 0;
  int df2 = 0;
  double p = 1.0;
  double eta_p_sq = 0.0;
  bool infinite_f = false;  // zero within-group variance with unequal means
};

/// One-way ANOVA of `dependent` over integer group codes in [0, n_levels).
/// Declared levels with no observations are dropped before computing
/// degrees of freedom.
AnovaResult one_way_anova(const Eigen::VectorXd& dependent,
                          const Eigen::VectorXi& groups, int n_levels);

/// Convenience overload: factor is a demographic field; the dependent is a
/// construct mean score (or the outcome when `construct` names it).
AnovaResult one_way_anova(const Dataset& data, const ModelSpec& spec,
                          const std::string& factor,
                          const std::string& construct);

/// "***" p < 0.001, "**" p < 0.01, "*" p < 0.05, "" otherwise (strict <).
std::string significance_stars(double p);

/// Arithmetic mean of the construct's items, one value per respondent.
Eigen::VectorXd construct_mean_scores(const Dataset& data,
                                      const ModelSpec& spec,
                                      const std::string& construct);

}  // namespace semann
