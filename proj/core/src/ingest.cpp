#include "semann/ingest.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "semann/csv.hpp"
#include "semann/errors.hpp"

namespace semann {

namespace {

double parse_number(const std::string& cell, const std::string& column,
                    std::size_t row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size() || !std::isfinite(v)) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw SchemaError("row " + std::to_string(row + 1) + ", column '" + column +
                      "': not a number: '" + cell + "'");
  }
}

std::string format_number(double v) {
  // shortest representation that round-trips; integers print without a dot
  char buf[32];
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double back = std::strtod(buf, nullptr);
    for (int prec = 1; prec <= 16; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
      if (std::strtod(shorter, nullptr) == v) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        break;
      }
    }
    (void)back;
  }
  return buf;
}

LoadResult load_table(const csv::Table& table, const ModelSpec& spec,
                      const LoadOptions& options) {
  if (table.header.empty()) throw SchemaError("missing header row");
  if (table.rows.empty()) throw DataError("empty dataset: header but no rows");

  std::map<std::string, int> col;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (!col.emplace(table.header[j], static_cast<int>(j)).second)
      throw SchemaError("duplicate column '" + table.header[j] + "'");
  }
  auto require = [&](const std::string& name) {
    const auto it = col.find(name);
    if (it == col.end()) throw SchemaError("missing column '" + name + "'");
    return it->second;
  };

  LoadResult result;
  Dataset& d = result.data;
  const std::size_t n = table.rows.size();

  d.item_names = spec.all_items();
  std::vector<int> item_cols;
  for (const auto& it : d.item_names) item_cols.push_back(require(it));

  d.demographic_fields = spec.controls;
  std::vector<int> demo_cols;
  for (const auto& ctl : spec.controls) demo_cols.push_back(require(ctl.name));

  int outcome_col = -1;
  if (!spec.outcome.empty()) {
    d.outcome_name = spec.outcome;
    outcome_col = require(spec.outcome);
  }

  const int id_col = col.count("respondent_id") ? col["respondent_id"] : -1;
  const int time_col =
      col.count("completion_seconds") ? col["completion_seconds"] : -1;
  const int source_col =
      col.count("source_address") ? col["source_address"] : -1;
  d.has_completion = time_col >= 0;
  d.has_source = source_col >= 0;

  std::set<int> used(item_cols.begin(), item_cols.end());
  used.insert(demo_cols.begin(), demo_cols.end());
  for (int c : {outcome_col, id_col, time_col, source_col})
    if (c >= 0) used.insert(c);
  for (const auto& [name, j] : col)
    if (!used.count(j))
      result.warnings.push_back("ignoring undeclared column '" + name + "'");

  d.items.resize(static_cast<Eigen::Index>(n),
                 static_cast<Eigen::Index>(d.item_names.size()));
  d.demographics.resize(static_cast<Eigen::Index>(n),
                        static_cast<Eigen::Index>(spec.controls.size()));
  if (outcome_col >= 0) d.outcome.resize(static_cast<Eigen::Index>(n));

  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    if (row.size() != table.header.size())
      throw SchemaError("row " + std::to_string(i + 1) + ": expected " +
                        std::to_string(table.header.size()) + " fields, got " +
                        std::to_string(row.size()));

    for (std::size_t k = 0; k < item_cols.size(); ++k) {
      const double v = parse_number(row[item_cols[k]], d.item_names[k], i);
      if (options.likert_items &&
          (v != std::floor(v) || v < 1.0 || v > 5.0))
        throw SchemaError("row " + std::to_string(i + 1) + ", item '" +
                          d.item_names[k] + "': value " + row[item_cols[k]] +
                          " is not an integer in [1, 5]");
      d.items(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
    }

    for (std::size_t k = 0; k < demo_cols.size(); ++k) {
      const auto& field = spec.controls[k];
      const std::string& cell = row[demo_cols[k]];
      int code = -1;
      for (std::size_t lv = 0; lv < field.levels.size(); ++lv)
        if (field.levels[lv] == cell) {
          code = static_cast<int>(lv);
          break;
        }
      if (code < 0)
        throw SchemaError("row " + std::to_string(i + 1) + ", field '" +
                          field.name + "': level '" + cell +
                          "' is not in the declared list");
      d.demographics(static_cast<Eigen::Index>(i),
                     static_cast<Eigen::Index>(k)) = code;
    }

    if (outcome_col >= 0) {
      const double v = parse_number(row[outcome_col], d.outcome_name, i);
      if (v <= 0.0)
        throw SchemaError("row " + std::to_string(i + 1) + ": outcome '" +
                          d.outcome_name + "' must be > 0, got " +
                          row[outcome_col]);
      d.outcome(static_cast<Eigen::Index>(i)) = v;
    }

    d.respondent_ids.push_back(id_col >= 0 ? row[id_col]
                                           : std::to_string(i + 1));
    if (time_col >= 0)
      d.completion_seconds.push_back(
          parse_number(row[time_col], "completion_seconds", i));
    if (source_col >= 0) d.source_address.push_back(row[source_col]);
  }
  return result;
}

}  // namespace

LoadResult load_csv(const std::string& path, const ModelSpec& spec,
                    const LoadOptions& options) {
  return load_table(csv::read_file(path), spec, options);
}

LoadResult load_csv_text(const std::string& text, const ModelSpec& spec,
                         const LoadOptions& options) {
  return load_table(csv::parse(text), spec, options);
}

std::string to_csv_text(const Dataset& d) {
  csv::Table t;
  t.header.push_back("respondent_id");
  for (const auto& it : d.item_names) t.header.push_back(it);
  for (const auto& f : d.demographic_fields) t.header.push_back(f.name);
  if (!d.outcome_name.empty()) t.header.push_back(d.outcome_name);
  if (d.has_completion) t.header.push_back("completion_seconds");
  if (d.has_source) t.header.push_back("source_address");

  for (Eigen::Index i = 0; i < d.n_rows(); ++i) {
    std::vector<std::string> row;
    row.push_back(d.respondent_ids[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < d.items.cols(); ++j)
      row.push_back(format_number(d.items(i, j)));
    for (Eigen::Index j = 0; j < d.demographics.cols(); ++j) {
      const auto& field = d.demographic_fields[static_cast<std::size_t>(j)];
      row.push_back(field.levels[static_cast<std::size_t>(d.demographics(i, j))]);
    }
    if (!d.outcome_name.empty()) row.push_back(format_number(d.outcome(i)));
    if (d.has_completion)
      row.push_back(
          format_number(d.completion_seconds[static_cast<std::size_t>(i)]));
    if (d.has_source)
      row.push_back(d.source_address[static_cast<std::size_t>(i)]);
    t.rows.push_back(std::move(row));
  }
  return csv::serialize(t);
}

void save_csv(const std::string& path, const Dataset& data) {
  csv::Table t = csv::parse(to_csv_text(data));
  csv::write_file(path, t);
}

ScreenResult screen(const Dataset& data, const ScreeningRules& rules) {
  if (rules.min_completion_seconds < 0.0)
    throw ConfigError("min_completion_seconds must be >= 0");
  const bool time_rule = rules.min_completion_seconds > 0.0;
  if (time_rule && !data.has_completion)
    throw ConfigError(
        "time control rule enabled but column 'completion_seconds' is absent");
  if (rules.dedupe_by_source && !data.has_source)
    throw ConfigError(
        "device limit rule enabled but column 'source_address' is absent");
  for (const auto& rule : rules.consistency) {
    if (data.demographic_index(rule.field) < 0)
      throw ConfigError("consistency rule '" + rule.name +
                        "' references absent field '" + rule.field + "'");
    if (data.demographic_index(rule.conflicting_field) < 0)
      throw ConfigError("consistency rule '" + rule.name +
                        "' references absent field '" + rule.conflicting_field +
                        "'");
  }

  ScreenResult result;
  std::set<std::string> seen_sources;
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    std::string fired;

    if (time_rule &&
        data.completion_seconds[idx] < rules.min_completion_seconds) {
      fired = "time control";
    } else if (rules.dedupe_by_source &&
               !seen_sources.insert(data.source_address[idx]).second) {
      fired = "device limit";
    } else {
      for (const auto& rule : rules.consistency) {
        const int f = data.demographic_index(rule.field);
        const int g = data.demographic_index(rule.conflicting_field);
        const auto& fl = data.demographic_fields[static_cast<std::size_t>(f)];
        const auto& gl = data.demographic_fields[static_cast<std::size_t>(g)];
        const std::string& fv =
            fl.levels[static_cast<std::size_t>(data.demographics(i, f))];
        const std::string& gv =
            gl.levels[static_cast<std::size_t>(data.demographics(i, g))];
        if (fv == rule.level && gv == rule.conflicting_level) {
          fired = rule.name;
          break;
        }
      }
    }

    if (fired.empty())
      keep.push_back(static_cast<int>(i));
    else
      result.log.push_back({static_cast<int>(i), data.respondent_ids[idx],
                            fired});
  }
  if (keep.empty()) throw DataError("screening excluded every row");
  result.data = data.select_rows(keep);
  return result;
}

std::string exclusion_log_csv(const std::vector<Exclusion>& log) {
  csv::Table t;
  t.header = {"row_index", "respondent_id", "rule"};
  for (const auto& e : log)
    t.rows.push_back({std::to_string(e.row_index), e.respondent_id, e.rule});
  return csv::serialize(t);
}

}  // namespace semann
