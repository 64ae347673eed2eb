#include "semann/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "semann/errors.hpp"
#include "semann/special_functions.hpp"

namespace semann {

namespace {

std::string value_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

OutcomeDescriptives describe_outcome(const Dataset& data,
                                     int max_distinct_bins) {
  if (data.outcome.size() == 0)
    throw ConfigError("dataset has no outcome column");
  const Eigen::Index n = data.outcome.size();
  if (n == 0) throw DataError("empty dataset");

  OutcomeDescriptives out;
  out.mean = data.outcome.mean();
  out.sd = std::sqrt((data.outcome.array() - out.mean).square().sum() /
                     static_cast<double>(n));

  std::map<double, long> counts;
  for (Eigen::Index i = 0; i < n; ++i) counts[data.outcome(i)]++;
  if (static_cast<int>(counts.size()) > max_distinct_bins) {
    counts.clear();
    for (Eigen::Index i = 0; i < n; ++i)
      counts[std::round(data.outcome(i))]++;
  }
  for (const auto& [v, c] : counts) out.freq.bins.push_back({value_label(v), c});
  out.freq.total = static_cast<long>(n);
  return out;
}

std::vector<std::pair<std::string, FrequencyTable>> describe_demographics(
    const Dataset& data) {
  std::vector<std::pair<std::string, FrequencyTable>> out;
  for (std::size_t f = 0; f < data.demographic_fields.size(); ++f) {
    const auto& field = data.demographic_fields[f];
    FrequencyTable table;
    table.total = static_cast<long>(data.n_rows());
    std::vector<long> counts(field.levels.size(), 0);
    for (Eigen::Index i = 0; i < data.n_rows(); ++i)
      counts[static_cast<std::size_t>(
          data.demographics(i, static_cast<Eigen::Index>(f)))]++;
    for (std::size_t lv = 0; lv < field.levels.size(); ++lv)
      table.bins.push_back({field.levels[lv], counts[lv]});
    out.emplace_back(field.name, std::move(table));
  }
  return out;
}

AnovaResult one_way_anova(const Eigen::VectorXd& dependent,
                          const Eigen::VectorXi& groups, int n_levels) {
  const Eigen::Index n = dependent.size();
  if (n != groups.size()) throw ConfigError("anova: length mismatch");

  std::vector<long> count(static_cast<std::size_t>(n_levels), 0);
  std::vector<double> sum(static_cast<std::size_t>(n_levels), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int g = groups(i);
    if (g < 0 || g >= n_levels) throw ConfigError("anova: group code out of range");
    count[static_cast<std::size_t>(g)]++;
    sum[static_cast<std::size_t>(g)] += dependent(i);
  }
  int k = 0;
  for (int g = 0; g < n_levels; ++g)
    if (count[static_cast<std::size_t>(g)] > 0) ++k;
  if (k < 2)
    throw DataError("anova: factor has fewer than two observed levels");

  const double grand = dependent.mean();
  double ss_between = 0.0;
  for (int g = 0; g < n_levels; ++g) {
    const auto gi = static_cast<std::size_t>(g);
    if (count[gi] == 0) continue;
    const double gm = sum[gi] / static_cast<double>(count[gi]);
    ss_between += static_cast<double>(count[gi]) * (gm - grand) * (gm - grand);
  }
  double ss_within = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto gi = static_cast<std::size_t>(groups(i));
    const double gm = sum[gi] / static_cast<double>(count[gi]);
    ss_within += (dependent(i) - gm) * (dependent(i) - gm);
  }

  AnovaResult r;
  r.df1 = k - 1;
  r.df2 = static_cast<int>(n) - k;
  if (r.df2 <= 0) throw DataError("anova: no residual degrees of freedom");

  if (ss_within <= 0.0) {
    if (ss_between > 0.0) {
      r.f = std::numeric_limits<double>::infinity();
      r.infinite_f = true;
      r.p = 0.0;
      r.eta_p_sq = 1.0;
    } else {
      r.f = 0.0;
      r.p = 1.0;
      r.eta_p_sq = 0.0;
    }
    return r;
  }

  r.f = (ss_between / r.df1) / (ss_within / r.df2);
  r.p = special::f_upper_tail(r.f, r.df1, r.df2);
  r.eta_p_sq = ss_between / (ss_between + ss_within);
  return r;
}

AnovaResult one_way_anova(const Dataset& data, const ModelSpec& spec,
                          const std::string& factor,
                          const std::string& construct) {
  const int fj = data.demographic_index(factor);
  if (fj < 0) throw ConfigError("anova: unknown factor '" + factor + "'");
  Eigen::VectorXd dep;
  if (construct == data.outcome_name && !construct.empty())
    dep = data.outcome;
  else
    dep = construct_mean_scores(data, spec, construct);
  const auto n_levels = static_cast<int>(
      data.demographic_fields[static_cast<std::size_t>(fj)].levels.size());
  return one_way_anova(dep, data.demographics.col(fj), n_levels);
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

Eigen::VectorXd construct_mean_scores(const Dataset& data,
                                      const ModelSpec& spec,
                                      const std::string& construct) {
  const Construct* c = spec.find_construct(construct);
  if (!c) throw ConfigError("unknown construct '" + construct + "'");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(data.n_rows());
  for (const auto& item : c->items) {
    const int j = data.item_index(item);
    if (j < 0) throw ConfigError("dataset lacks item '" + item + "'");
    out += data.items.col(j);
  }
  return out / static_cast<double>(c->items.size());
}

}  // namespace semann
