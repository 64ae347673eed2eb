#include "semann/dataset.hpp"

#include "semann/errors.hpp"

namespace semann {

int Dataset::item_index(const std::string& name) const {
  for (std::size_t i = 0; i < item_names.size(); ++i)
    if (item_names[i] == name) return static_cast<int>(i);
  return -1;
}

int Dataset::demographic_index(const std::string& name) const {
  for (std::size_t i = 0; i < demographic_fields.size(); ++i)
    if (demographic_fields[i].name == name) return static_cast<int>(i);
  return -1;
}

Eigen::VectorXd Dataset::demographic_values(const std::string& name) const {
  const int j = demographic_index(name);
  if (j < 0) throw ConfigError("unknown demographic field: " + name);
  return demographics.col(j).cast<double>();
}

Dataset Dataset::select_rows(const std::vector<int>& rows) const {
  Dataset out;
  out.item_names = item_names;
  out.demographic_fields = demographic_fields;
  out.outcome_name = outcome_name;
  out.has_completion = has_completion;
  out.has_source = has_source;

  const auto n = static_cast<Eigen::Index>(rows.size());
  out.items.resize(n, items.cols());
  out.demographics.resize(n, demographics.cols());
  if (outcome.size() > 0) out.outcome.resize(n);
  out.respondent_ids.reserve(rows.size());
  if (has_completion) out.completion_seconds.reserve(rows.size());
  if (has_source) out.source_address.reserve(rows.size());

  for (Eigen::Index i = 0; i < n; ++i) {
    const int r = rows[static_cast<std::size_t>(i)];
    out.items.row(i) = items.row(r);
    if (demographics.cols() > 0) out.demographics.row(i) = demographics.row(r);
    if (outcome.size() > 0) out.outcome(i) = outcome(r);
    out.respondent_ids.push_back(respondent_ids[static_cast<std::size_t>(r)]);
    if (has_completion)
      out.completion_seconds.push_back(
          completion_seconds[static_cast<std::size_t>(r)]);
    if (has_source)
      out.source_address.push_back(source_address[static_cast<std::size_t>(r)]);
  }
  return out;
}

}  // namespace semann
