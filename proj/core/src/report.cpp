#include "semann/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace semann::report {

namespace {

using ordered_json = nlohmann::ordered_json;

class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header)
      : header_(std::move(header)) {}

  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  std::string str() const {
    std::vector<std::size_t> width(header_.size(), 0);
    auto grow = [&](const std::vector<std::string>& row) {
      for (std::size_t j = 0; j < row.size() && j < width.size(); ++j)
        width[j] = std::max(width[j], row[j].size());
    };
    grow(header_);
    for (const auto& r : rows_) grow(r);

    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& row) {
      for (std::size_t j = 0; j < width.size(); ++j) {
        const std::string& cell = j < row.size() ? row[j] : std::string();
        if (j == 0) {  // first column left-aligned, the rest right-aligned
          out << cell << std::string(width[j] - cell.size(), ' ');
        } else {
          out << "  " << std::string(width[j] - cell.size(), ' ') << cell;
        }
      }
      out << '\n';
    };
    emit(header_);
    std::size_t total = 0;
    for (std::size_t j = 0; j < width.size(); ++j)
      total += width[j] + (j ? 2 : 0);
    out << std::string(total, '-') << '\n';
    for (const auto& r : rows_) emit(r);
    return out.str();
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

ordered_json anova_result_json(const AnovaResult& r) {
  ordered_json j;
  if (r.infinite_f)
    j["f"] = nullptr;
  else
    j["f"] = r.f;
  j["infinite_f"] = r.infinite_f;
  j["df1"] = r.df1;
  j["df2"] = r.df2;
  j["p"] = r.p;
  j["eta_p_sq"] = r.eta_p_sq;
  j["stars"] = significance_stars(r.p);
  return j;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string percent(double fraction, int decimals) {
  return fixed(100.0 * fraction, decimals) + "%";
}

std::string p_value_text(double p) {
  if (p < 0.001) return "<0.001";
  return fixed(p, 3);
}

std::string descriptives_text(
    const std::vector<std::pair<std::string, FrequencyTable>>& demographics,
    const std::string& outcome_name, const OutcomeDescriptives& outcome) {
  std::ostringstream out;
  if (!demographics.empty()) {
    out << "Demographic characteristics\n";
    TextTable t({"Variable", "Frequency", "Proportion"});
    for (const auto& [field, table] : demographics) {
      t.add({field, "", ""});
      for (const auto& bin : table.bins)
        t.add({"  " + bin.label, std::to_string(bin.count),
               percent(static_cast<double>(bin.count) /
                       static_cast<double>(table.total))});
    }
    out << t.str() << "\n";
  }
  out << "Accepted gap (" << outcome_name << ")\n";
  TextTable t({"Gap", "Frequency", "Proportion"});
  for (const auto& bin : outcome.freq.bins)
    t.add({bin.label + " s", std::to_string(bin.count),
           percent(static_cast<double>(bin.count) /
                   static_cast<double>(outcome.freq.total))});
  out << t.str();
  out << "Mean " << fixed(outcome.mean, 2) << " s\n";
  out << "Standard deviation " << fixed(outcome.sd, 2) << " s\n";
  return out.str();
}

std::string descriptives_json(
    const std::vector<std::pair<std::string, FrequencyTable>>& demographics,
    const std::string& outcome_name, const OutcomeDescriptives& outcome) {
  ordered_json j;
  j["table"] = "descriptives";
  ordered_json demo = ordered_json::array();
  for (const auto& [field, table] : demographics) {
    ordered_json f;
    f["field"] = field;
    f["total"] = table.total;
    ordered_json bins = ordered_json::array();
    for (const auto& bin : table.bins) {
      ordered_json b;
      b["label"] = bin.label;
      b["count"] = bin.count;
      b["proportion"] =
          static_cast<double>(bin.count) / static_cast<double>(table.total);
      bins.push_back(std::move(b));
    }
    f["bins"] = std::move(bins);
    demo.push_back(std::move(f));
  }
  j["demographics"] = std::move(demo);
  ordered_json o;
  o["name"] = outcome_name;
  o["mean"] = outcome.mean;
  o["sd"] = outcome.sd;
  o["total"] = outcome.freq.total;
  ordered_json bins = ordered_json::array();
  for (const auto& bin : outcome.freq.bins) {
    ordered_json b;
    b["label"] = bin.label;
    b["count"] = bin.count;
    b["proportion"] = static_cast<double>(bin.count) /
                      static_cast<double>(outcome.freq.total);
    bins.push_back(std::move(b));
  }
  o["bins"] = std::move(bins);
  j["outcome"] = std::move(o);
  return dump(j);
}

std::string anova_text(const std::vector<AnovaRow>& rows) {
  TextTable t({"Independent variable", "Dependent variable",
               "Degrees of freedom", "F", "eta_p^2"});
  for (const auto& row : rows) {
    const auto& r = row.result;
    t.add({row.factor, row.dependent,
           "(" + std::to_string(r.df1) + "," + std::to_string(r.df2) + ")",
           (r.infinite_f ? "inf" : fixed(r.f, 2)) + significance_stars(r.p),
           fixed(r.eta_p_sq, 2)});
  }
  return "One-way ANOVA (***: p < 0.001; **: p < 0.01; *: p < 0.05)\n" +
         t.str();
}

std::string anova_json(const std::vector<AnovaRow>& rows) {
  ordered_json j;
  j["table"] = "anova";
  ordered_json out = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json r;
    r["factor"] = row.factor;
    r["dependent"] = row.dependent;
    r.update(anova_result_json(row.result));
    out.push_back(std::move(r));
  }
  j["rows"] = std::move(out);
  return dump(j);
}

std::string reliability_text(const std::vector<ReliabilityRow>& rows) {
  TextTable t({"Path", "Estimate", "Cronbach's alpha",
               "Average variance extracted", "Composite reliability"});
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.items.size(); ++k) {
      t.add({row.construct + " -> " + row.items[k],
             fixed(row.loadings[k], 2) + row.loading_stars[k],
             k == 0 ? fixed(row.alpha, 2) : "",
             k == 0 ? fixed(row.ave, 2) : "", k == 0 ? fixed(row.cr, 2) : ""});
    }
  }
  return "Measurement reliability and convergent validity\n" + t.str();
}

std::string reliability_json(const std::vector<ReliabilityRow>& rows) {
  ordered_json j;
  j["table"] = "reliability";
  ordered_json out = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json r;
    r["construct"] = row.construct;
    r["alpha"] = row.alpha;
    r["ave"] = row.ave;
    r["cr"] = row.cr;
    ordered_json loadings = ordered_json::array();
    for (std::size_t k = 0; k < row.items.size(); ++k) {
      ordered_json l;
      l["item"] = row.items[k];
      l["standardized"] = row.loadings[k];
      l["stars"] = row.loading_stars[k];
      loadings.push_back(std::move(l));
    }
    r["loadings"] = std::move(loadings);
    out.push_back(std::move(r));
  }
  j["constructs"] = std::move(out);
  return dump(j);
}

std::string discriminant_text(const DiscriminantMatrix& matrix) {
  std::vector<std::string> header = {""};
  for (const auto& c : matrix.constructs) header.push_back(c);
  TextTable t(header);
  const auto k = matrix.constructs.size();
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<std::string> row = {matrix.constructs[i]};
    for (std::size_t j = 0; j < k; ++j)
      row.push_back(j <= i ? fixed(matrix.values(static_cast<Eigen::Index>(i),
                                                 static_cast<Eigen::Index>(j)),
                                   2)
                           : "");
    t.add(std::move(row));
  }
  std::ostringstream out;
  out << "Discriminant validity (diagonal = sqrt(AVE))\n" << t.str();
  for (std::size_t i = 0; i < k; ++i)
    if (!matrix.pass[i])
      out << "note: " << matrix.constructs[i]
          << " fails the discriminant criterion\n";
  return out.str();
}

std::string discriminant_json(const DiscriminantMatrix& matrix) {
  ordered_json j;
  j["table"] = "discriminant_validity";
  j["constructs"] = matrix.constructs;
  ordered_json values = ordered_json::array();
  for (Eigen::Index i = 0; i < matrix.values.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < matrix.values.cols(); ++c)
      row.push_back(matrix.values(i, c));
    values.push_back(std::move(row));
  }
  j["values"] = std::move(values);
  j["pass"] = matrix.pass;
  return dump(j);
}

namespace {

ordered_json fit_indices_json(const FitIndices& fit) {
  ordered_json j;
  j["chi_square"] = fit.chi_square;
  j["df"] = fit.df;
  j["baseline_chi_square"] = fit.baseline_chi_square;
  j["baseline_df"] = fit.baseline_df;
  j["rmsea"] = fit.rmsea;
  j["rmsea_pass"] = fit.rmsea_pass;
  j["gfi"] = fit.gfi;
  j["gfi_pass"] = fit.gfi_pass;
  j["cfi"] = fit.cfi;
  j["cfi_pass"] = fit.cfi_pass;
  if (fit.tli_defined)
    j["tli"] = fit.tli;
  else
    j["tli"] = nullptr;
  j["tli_pass"] = fit.tli_pass;
  if (fit.chi_square_per_df_defined)
    j["chi_square_per_df"] = fit.chi_square_per_df;
  else
    j["chi_square_per_df"] = nullptr;
  j["chi_square_per_df_pass"] = fit.chi_square_per_df_pass;
  j["all_pass"] = fit.all_pass();
  return j;
}

}  // namespace

std::string fit_indices_text(const FitIndices& fit) {
  TextTable t({"Fit category", "Fit index", "Value", "Criterion", "Pass"});
  t.add({"Absolute fit", "RMSEA", fixed(fit.rmsea, 2), "< 0.08",
         fit.rmsea_pass ? "yes" : "no"});
  t.add({"", "GFI", fixed(fit.gfi, 2), "> 0.90", fit.gfi_pass ? "yes" : "no"});
  t.add({"Incremental fit", "CFI", fixed(fit.cfi, 2), "> 0.90",
         fit.cfi_pass ? "yes" : "no"});
  t.add({"", "TLI", fit.tli_defined ? fixed(fit.tli, 2) : "n/a", "> 0.90",
         fit.tli_pass ? "yes" : "no"});
  t.add({"Parsimonious fit", "chi^2/df",
         fit.chi_square_per_df_defined ? fixed(fit.chi_square_per_df, 2)
                                       : "n/a",
         "< 5.00", fit.chi_square_per_df_pass ? "yes" : "no"});
  std::ostringstream out;
  out << "Goodness-of-fit indices (chi^2 = " << fixed(fit.chi_square, 2)
      << ", df = " << fit.df << ")\n"
      << t.str();
  return out.str();
}

std::string sem_fit_json(const SemFit& fit) {
  ordered_json j;
  j["table"] = "sem_fit";
  j["n"] = fit.n;
  j["fit"] = fit_indices_json(fit.fit);
  ordered_json conv;
  conv["iterations"] = fit.iterations;
  conv["gradient_norm"] = fit.gradient_norm;
  conv["converged"] = fit.converged;
  conv["stop_reason"] = fit.stop_reason;
  j["convergence"] = std::move(conv);
  ordered_json est = ordered_json::array();
  for (const auto& e : fit.estimates) {
    ordered_json r;
    r["label"] = e.label;
    r["estimate"] = e.estimate;
    r["se"] = e.se;
    r["z"] = e.z;
    r["p"] = e.p;
    r["stars"] = e.stars;
    r["standardized"] = e.standardized;
    est.push_back(std::move(r));
  }
  j["estimates"] = std::move(est);
  j["latent_names"] = fit.latent_names;
  ordered_json corr = ordered_json::array();
  for (Eigen::Index i = 0; i < fit.latent_correlations.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < fit.latent_correlations.cols(); ++c)
      row.push_back(fit.latent_correlations(i, c));
    corr.push_back(std::move(row));
  }
  j["latent_correlations"] = std::move(corr);
  j["warnings"] = fit.warnings;
  return dump(j);
}

std::string estimates_text(const SemFit& fit) {
  TextTable t({"Parameter", "Estimate", "SE", "z", "p", "Standardized"});
  for (const auto& e : fit.estimates)
    t.add({e.label, fixed(e.estimate, 3), fixed(e.se, 3), fixed(e.z, 2),
           p_value_text(e.p) + e.stars, fixed(e.standardized, 3)});
  return "Parameter estimates\n" + t.str();
}

std::string hypotheses_text(const std::vector<HypothesisResult>& rows) {
  TextTable t({"Hypothesis", "Path", "Expected", "Estimate", "Result"});
  for (const auto& r : rows)
    t.add({r.id, r.source + " -> " + r.target,
           r.expected_sign > 0 ? "+" : "-", fixed(r.estimate, 2) + r.stars,
           r.supported ? "True" : "False"});
  return "Hypothesis testing (***: p < 0.001; **: p < 0.01; *: p < 0.05)\n" +
         t.str();
}

std::string hypotheses_json(const std::vector<HypothesisResult>& rows) {
  ordered_json j;
  j["table"] = "hypotheses";
  ordered_json out = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json h;
    h["id"] = r.id;
    h["source"] = r.source;
    h["target"] = r.target;
    h["expected_sign"] = r.expected_sign;
    h["standardized"] = r.estimate;
    h["p"] = r.p;
    h["stars"] = r.stars;
    h["supported"] = r.supported;
    out.push_back(std::move(h));
  }
  j["rows"] = std::move(out);
  return dump(j);
}

std::vector<ControlEffectRow> control_effects(const SemFit& fit) {
  std::vector<ControlEffectRow> rows;
  const auto& latents = fit.model.latents();
  for (const auto& e : fit.estimates) {
    if (e.matrix != ParamMatrix::B) continue;
    const auto& source = latents[static_cast<std::size_t>(e.col)];
    if (source.kind != LatentKind::ObservedCovariate) continue;
    const auto& target =
        latents[static_cast<std::size_t>(fit.model.n_exogenous() + e.row)];
    rows.push_back({target.name, source.name, e.standardized, e.p, e.stars});
  }
  return rows;
}

std::string control_effects_text(const std::vector<ControlEffectRow>& rows) {
  TextTable t({"Path", "Estimate", "p-value"});
  for (const auto& r : rows)
    t.add({r.control + " -> " + r.target, fixed(r.estimate, 2),
           p_value_text(r.p)});
  return "Effects of demographic characteristics\n" + t.str();
}

std::string control_effects_json(const std::vector<ControlEffectRow>& rows) {
  ordered_json j;
  j["table"] = "control_effects";
  ordered_json out = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json c;
    c["control"] = r.control;
    c["target"] = r.target;
    c["standardized"] = r.estimate;
    c["p"] = r.p;
    c["stars"] = r.stars;
    out.push_back(std::move(c));
  }
  j["rows"] = std::move(out);
  return dump(j);
}

std::string mediation_text(const MediationRun& run) {
  TextTable t({"Relation", "Direct effect", "Indirect effect", "95% CI",
               "Mediation"});
  for (const auto& r : run.records)
    t.add({r.source + " -> " + r.mediator + " -> " + r.target,
           fixed(r.direct, 2) + r.direct_stars,
           fixed(r.indirect, 2) + r.indirect_stars,
           "[" + fixed(r.indirect_lo, 3) + ", " + fixed(r.indirect_hi, 3) + "]",
           r.classification});
  std::ostringstream out;
  out << "Mediation effects (" << run.replicates_used << "/"
      << run.replicates_requested << " bootstrap replicates)\n"
      << t.str();
  for (const auto& w : run.warnings) out << "warning: " << w << '\n';
  return out.str();
}

std::string mediation_json(const MediationRun& run) {
  ordered_json j;
  j["table"] = "mediation";
  j["replicates_requested"] = run.replicates_requested;
  j["replicates_used"] = run.replicates_used;
  ordered_json out = ordered_json::array();
  for (const auto& r : run.records) {
    ordered_json m;
    m["source"] = r.source;
    m["mediator"] = r.mediator;
    m["target"] = r.target;
    m["direct"] = r.direct;
    m["direct_ci"] = {r.direct_lo, r.direct_hi};
    m["direct_stars"] = r.direct_stars;
    m["indirect"] = r.indirect;
    m["indirect_ci"] = {r.indirect_lo, r.indirect_hi};
    m["indirect_stars"] = r.indirect_stars;
    m["classification"] = r.classification;
    m["degenerate_ci"] = r.degenerate_ci;
    out.push_back(std::move(m));
  }
  j["records"] = std::move(out);
  j["warnings"] = run.warnings;
  return dump(j);
}

std::string cv_text(const std::string& target, const CvResult& cv) {
  TextTable t({"Cross-validation", "Training RMSE", "Testing RMSE"});
  for (const auto& f : cv.folds)
    t.add({"Round " + std::to_string(f.fold + 1), fixed(f.train_rmse, 3),
           fixed(f.test_rmse, 3)});
  t.add({"Mean", fixed(cv.train_mean, 3), fixed(cv.test_mean, 3)});
  t.add({"SD", fixed(cv.train_sd, 3), fixed(cv.test_sd, 3)});
  return "RMSE for the network predicting " + target + "\n" + t.str();
}

std::string cv_json(const std::string& target, const CvResult& cv) {
  ordered_json j;
  j["table"] = "ann_rmse";
  j["target"] = target;
  ordered_json folds = ordered_json::array();
  for (const auto& f : cv.folds) {
    ordered_json r;
    r["fold"] = f.fold;
    r["training_rmse"] = f.train_rmse;
    r["testing_rmse"] = f.test_rmse;
    folds.push_back(std::move(r));
  }
  j["folds"] = std::move(folds);
  j["training_mean"] = cv.train_mean;
  j["training_sd"] = cv.train_sd;
  j["testing_mean"] = cv.test_mean;
  j["testing_sd"] = cv.test_sd;
  j["warnings"] = cv.warnings;
  return dump(j);
}

std::string importance_text(const std::string& target,
                            const ImportanceReport& report) {
  std::vector<std::string> header = {"Cross-validation"};
  for (const auto& n : report.feature_names) header.push_back(n);
  TextTable t(header);
  for (Eigen::Index f = 0; f < report.fold_importance.rows(); ++f) {
    std::vector<std::string> row = {"Round " + std::to_string(f + 1)};
    for (Eigen::Index c = 0; c < report.fold_importance.cols(); ++c)
      row.push_back(fixed(report.fold_importance(f, c), 2));
    t.add(std::move(row));
  }
  std::vector<std::string> mean_row = {"Mean"};
  std::vector<std::string> nri_row = {"NRI"};
  for (Eigen::Index c = 0; c < report.mean_importance.size(); ++c) {
    mean_row.push_back(fixed(report.mean_importance(c), 2));
    nri_row.push_back(fixed(report.nri_percent(c), 2) + "%");
  }
  t.add(std::move(mean_row));
  t.add(std::move(nri_row));
  std::ostringstream out;
  out << "Importance of input variables on " << target << "\n" << t.str();
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
  return out.str();
}

std::string importance_json(const std::string& target,
                            const ImportanceReport& report) {
  ordered_json j;
  j["table"] = "ann_importance";
  j["target"] = target;
  j["features"] = report.feature_names;
  ordered_json folds = ordered_json::array();
  for (Eigen::Index f = 0; f < report.fold_importance.rows(); ++f) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < report.fold_importance.cols(); ++c)
      row.push_back(report.fold_importance(f, c));
    folds.push_back(std::move(row));
  }
  j["fold_importance"] = std::move(folds);
  ordered_json mean = ordered_json::array(), nri = ordered_json::array();
  for (Eigen::Index c = 0; c < report.mean_importance.size(); ++c) {
    mean.push_back(report.mean_importance(c));
    nri.push_back(report.nri_percent(c));
  }
  j["mean_importance"] = std::move(mean);
  j["nri_percent"] = std::move(nri);
  j["warnings"] = report.warnings;
  return dump(j);
}

std::string comparison_text(const std::vector<ComparisonSection>& sections) {
  TextTable t({"Input variable", "SEM path coefficient", "ANN NRI",
               "SEM ranking", "ANN ranking", "Match"});
  for (const auto& section : sections) {
    t.add({"Output variable: " + section.target, "", "", "", "", ""});
    for (const auto& r : section.rows)
      t.add({"  " + r.label, fixed(r.sem_estimate, 2),
             fixed(r.nri_percent, 2) + "%", std::to_string(r.sem_rank),
             std::to_string(r.ann_rank),
             std::string(r.match ? "Yes" : "No") + (r.tie ? " (tie)" : "")});
  }
  return "Comparison between SEM and ANN results\n" + t.str();
}

std::string comparison_json(const std::vector<ComparisonSection>& sections) {
  ordered_json j;
  j["table"] = "sem_ann_comparison";
  ordered_json out = ordered_json::array();
  for (const auto& section : sections) {
    ordered_json s;
    s["target"] = section.target;
    ordered_json rows = ordered_json::array();
    for (const auto& r : section.rows) {
      ordered_json c;
      c["label"] = r.label;
      c["sem_estimate"] = r.sem_estimate;
      c["nri_percent"] = r.nri_percent;
      c["sem_rank"] = r.sem_rank;
      c["ann_rank"] = r.ann_rank;
      c["match"] = r.match;
      c["tie"] = r.tie;
      rows.push_back(std::move(c));
    }
    s["rows"] = std::move(rows);
    out.push_back(std::move(s));
  }
  j["sections"] = std::move(out);
  return dump(j);
}

}  // namespace semann::report
