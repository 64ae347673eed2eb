#include "semann/pipeline.hpp"

#include <Eigen/Cholesky>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semann/ann.hpp"
#include "semann/bundled.hpp"
#include "semann/importance.hpp"
#include "semann/mediation.hpp"
#include "semann/psychometrics.hpp"
#include "semann/report.hpp"
#include "semann/rng.hpp"
#include "semann/sem_fit.hpp"
#include "semann/stats.hpp"

namespace semann {

const char* stage_name(Stage stage) {
  switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Screen: return "screen";
    case Stage::Describe: return "describe";
    case Stage::Anova: return "anova";
    case Stage::Measurement: return "measurement";
    case Stage::Structural: return "structural";
    case Stage::Mediation: return "mediation";
    case Stage::Ann: return "ann";
    case Stage::Compare: return "compare";
  }
  return "unknown";
}

int stage_exit_code(Stage stage) { return 10 + static_cast<int>(stage); }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kAnnStream = 0x616e6e;  // "ann"

struct Emitter {
  fs::path dir;
  std::vector<std::pair<std::string, std::string>> files;  // name, hash

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    out << content;
    files.push_back({name, fnv1a_hex(content)});
  }
};

// regression-method factor scores from the measurement fit:
// scores = centered_observed * Sigma^-1 * Lambda * C
Eigen::MatrixXd factor_scores(const SemFit& cfa, const Dataset& data) {
  const Eigen::MatrixXd x = cfa.model.observed_matrix(data);
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd c = latent_covariance(cfa.params);
  Eigen::LLT<Eigen::MatrixXd> llt(cfa.implied);
  if (llt.info() != Eigen::Success)
    throw NumericError("factor scores: implied covariance not positive definite");
  return centered * llt.solve(cfa.params.lambda * c);
}

struct FeatureSource {
  const ModelSpec& spec;
  const Dataset& data;
  AnnFeatureSource kind;
  const SemFit* cfa;                 // for factor scores
  Eigen::MatrixXd scores;            // lazily computed factor scores

  Eigen::VectorXd values(const std::string& name) {
    if (spec.has_construct(name)) {
      if (kind == AnnFeatureSource::FactorScores) {
        if (scores.size() == 0) scores = factor_scores(*cfa, data);
        const int l = cfa->model.latent_index(name);
        if (l < 0) throw ConfigError("factor scores: unknown construct " + name);
        return scores.col(l);
      }
      return construct_mean_scores(data, spec, name);
    }
    if (data.demographic_index(name) >= 0) return data.demographic_values(name);
    if (name == data.outcome_name) return data.outcome;
    throw ConfigError("no data column for variable '" + name + "'");
  }
};

struct StageStatus {
  std::string name;
  std::string status;  // "ok", "failed", "skipped"
};

void write_manifest(Emitter& emitter, std::uint64_t seed,
                    const std::vector<StageStatus>& stages,
                    const std::vector<std::string>& warnings, bool completed) {
  ordered_json j;
  j["format"] = "semann-manifest";
  j["version"] = 1;
  j["seed"] = seed;
  j["completed"] = completed;
  ordered_json st = ordered_json::array();
  for (const auto& s : stages) {
    ordered_json e;
    e["name"] = s.name;
    e["status"] = s.status;
    st.push_back(std::move(e));
  }
  j["stages"] = std::move(st);
  ordered_json files = ordered_json::array();
  for (const auto& [name, hash] : emitter.files) {
    ordered_json f;
    f["path"] = name;
    f["hash"] = "fnv1a64:" + hash;
    files.push_back(std::move(f));
  }
  j["files"] = std::move(files);
  j["warnings"] = warnings;
  std::ofstream out(emitter.dir / "manifest.json", std::ios::binary);
  out << j.dump(2) << "\n";
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  fs::create_directories(config.output_dir);
  Emitter emitter{config.output_dir, {}};
  PipelineResult result;
  std::vector<StageStatus> stages;

  Stage current = Stage::Ingest;
  auto fail = [&](const std::string& what) -> StageError {
    stages.push_back({stage_name(current), "failed"});
    write_manifest(emitter, config.seed, stages, result.warnings, false);
    return StageError(current, what);
  };
  auto done = [&] { stages.push_back({stage_name(current), "ok"}); };

  try {
    // ---- ingest
    current = Stage::Ingest;
    ModelSpec spec;
    Dataset data;
    try {
      spec = config.model_path.empty() ? bundled_model()
                                       : parse_model_file(config.model_path);
      LoadOptions load;
      load.likert_items = config.likert_items;
      LoadResult loaded = load_csv(config.data_path, spec, load);
      data = std::move(loaded.data);
      for (auto& w : loaded.warnings) result.warnings.push_back(std::move(w));
    } catch (const Error& e) {
      throw fail(e.what());
    }
    done();

    // ---- screen
    current = Stage::Screen;
    try {
      ScreeningRules rules = config.screening;
      bool run_rules = true;
      if (config.screen_auto) {
        if (!data.has_completion) rules.min_completion_seconds = 0.0;
        if (!data.has_source) rules.dedupe_by_source = false;
        run_rules = rules.min_completion_seconds > 0.0 ||
                    rules.dedupe_by_source || !rules.consistency.empty();
      }
      if (run_rules) {
        ScreenResult screened = screen(data, rules);
        emitter.write("exclusion_log.csv", exclusion_log_csv(screened.log));
        data = std::move(screened.data);
        done();
      } else {
        stages.push_back({stage_name(current), "skipped"});
        result.warnings.push_back(
            "screening skipped: no metadata columns present");
      }
    } catch (const Error& e) {
      throw fail(e.what());
    }

    // ---- describe
    current = Stage::Describe;
    try {
      const auto demo = describe_demographics(data);
      const auto outcome = describe_outcome(data);
      emitter.write("descriptives.txt",
                    report::descriptives_text(demo, data.outcome_name, outcome));
      emitter.write("descriptives.json",
                    report::descriptives_json(demo, data.outcome_name, outcome));
    } catch (const Error& e) {
      throw fail(e.what());
    }
    done();

    // ---- anova battery: every demographic factor x every construct score
    current = Stage::Anova;
    try {
      std::vector<report::AnovaRow> rows;
      for (const auto& field : data.demographic_fields)
        for (const auto& construct : spec.measurement)
          rows.push_back({field.name, construct.name,
                          one_way_anova(data, spec, field.name, construct.name)});
      emitter.write("anova.txt", report::anova_text(rows));
      emitter.write("anova.json", report::anova_json(rows));
    } catch (const Error& e) {
      throw fail(e.what());
    }
    done();

    // ---- measurement model: CFA, reliability, discriminant validity
    current = Stage::Measurement;
    SemFit cfa;
    try {
      FitOptions options;
      options.mode = SemMode::Measurement;
      cfa = fit_ml(spec, data, options);
      for (const auto& w : cfa.warnings) result.warnings.push_back(w);
      emitter.write("measurement_fit.txt", report::fit_indices_text(cfa.fit));
      emitter.write("measurement_fit.json", report::sem_fit_json(cfa));

      std::vector<report::ReliabilityRow> rel;
      std::vector<double> aves;
      for (const auto& construct : spec.measurement) {
        report::ReliabilityRow row;
        row.construct = construct.name;
        row.items = construct.items;
        row.loadings = cfa.standardized_loadings(construct.name);
        for (const auto& item : construct.items) {
          const auto* est = cfa.find(construct.name + "=~" + item);
          row.loading_stars.push_back(est ? est->stars : "");  // marker: fixed
        }
        Eigen::MatrixXd items(data.n_rows(),
                              static_cast<Eigen::Index>(construct.items.size()));
        for (std::size_t k = 0; k < construct.items.size(); ++k)
          items.col(static_cast<Eigen::Index>(k)) =
              data.items.col(data.item_index(construct.items[k]));
        row.alpha = cronbach_alpha(items);
        const AveCr conv = ave_cr(row.loadings);
        row.ave = conv.ave;
        row.cr = conv.cr;
        aves.push_back(conv.ave);
        rel.push_back(std::move(row));
      }
      emitter.write("reliability.txt", report::reliability_text(rel));
      emitter.write("reliability.json", report::reliability_json(rel));

      const DiscriminantMatrix disc = discriminant_validity(
          cfa.latent_names, aves, cfa.latent_correlations);
      emitter.write("discriminant.txt", report::discriminant_text(disc));
      emitter.write("discriminant.json", report::discriminant_json(disc));
    } catch (const Error& e) {
      throw fail(e.what());
    }
    done();

    // ---- structural model
    current = Stage::Structural;
    SemFit sem;
    try {
      if (spec.structural.empty())
        throw ConfigError("model declares no structural regressions");
      FitOptions options;
      options.mode = SemMode::Structural;
      sem = fit_ml(spec, data, options);
      for (const auto& w : sem.warnings) result.warnings.push_back(w);
      emitter.write("structural_fit.txt",
                    report::fit_indices_text(sem.fit) + "\n" +
                        report::estimates_text(sem));
      emitter.write("structural_fit.json", report::sem_fit_json(sem));
      if (!spec.hypotheses.empty()) {
        const auto hyp = test_hypotheses(sem, spec.hypotheses);
        emitter.write("hypotheses.txt", report::hypotheses_text(hyp));
        emitter.write("hypotheses.json", report::hypotheses_json(hyp));
      }
      const auto controls = report::control_effects(sem);
      if (!controls.empty()) {
        emitter.write("control_effects.txt",
                      report::control_effects_text(controls));
        emitter.write("control_effects.json",
                      report::control_effects_json(controls));
      }
    } catch (const Error& e) {
      throw fail(e.what());
    }
    done();

    // ---- mediation bootstrap
    current = Stage::Mediation;
    try {
      if (!spec.mediations.empty()) {
        MediationOptions options;
        options.replicates = config.bootstrap_replicates;
        options.seed = config.seed;
        options.workers = config.workers;
        const MediationRun run =
            bootstrap_mediation(spec, data, spec.mediations, options);
        for (const auto& w : run.warnings) result.warnings.push_back(w);
        emitter.write("mediation.txt", report::mediation_text(run));
        emitter.write("mediation.json", report::mediation_json(run));
        done();
      } else {
        stages.push_back({stage_name(current), "skipped"});
      }
    } catch (const Error& e) {
      throw fail(e.what());
    }

    // ---- stage 2: one network per SEM-significant endogenous target
    current = Stage::Ann;
    struct AnnRun {
      std::string target;
      std::vector<std::string> inputs;
      CvResult cv;
      ImportanceReport importance;
    };
    std::vector<AnnRun> runs;
    try {
      FeatureSource features{spec, data, config.ann_features, &cfa, {}};
      const int m = sem.model.n_exogenous();
      int target_index = 0;
      for (const auto& info : sem.model.latents()) {
        if (!info.endogenous) continue;
        const int ti = target_index++;
        (void)ti;
        // significant predictors, in regression declaration order
        std::vector<std::string> inputs;
        for (const auto& r : spec.structural) {
          if (r.target != info.name) continue;
          for (const auto& pred : r.predictors) {
            const auto* est = sem.find_path(info.name, pred);
            if (est && est->p < config.significance_threshold)
              inputs.push_back(pred);
          }
        }
        if (inputs.size() < 2) {
          if (!inputs.empty())
            result.warnings.push_back(
                "ann: target " + info.name +
                " has fewer than 2 significant predictors, skipped");
          continue;
        }

        AnnRun run;
        run.target = info.name;
        run.inputs = inputs;
        Eigen::MatrixXd x(data.n_rows(),
                          static_cast<Eigen::Index>(inputs.size()));
        for (std::size_t k = 0; k < inputs.size(); ++k)
          x.col(static_cast<Eigen::Index>(k)) = features.values(inputs[k]);
        const Eigen::VectorXd y = features.values(info.name);

        AnnConfig ann_config;
        ann_config.hidden_sizes = config.hidden_sizes;
        ann_config.folds = config.folds;
        ann_config.workers = config.workers;
        ann_config.seed =
            Rng::derive(config.seed, kAnnStream,
                        static_cast<std::uint64_t>(runs.size()))
                .next_u64();
        run.cv = cross_validate(x, y, ann_config);
        run.importance =
            permutation_importance(run.cv, x, y, inputs, ann_config);
        for (const auto& w : run.cv.warnings) result.warnings.push_back(w);
        for (const auto& w : run.importance.warnings)
          result.warnings.push_back(w);

        emitter.write("ann_rmse_" + info.name + ".txt",
                      report::cv_text(info.name, run.cv));
        emitter.write("ann_rmse_" + info.name + ".json",
                      report::cv_json(info.name, run.cv));
        emitter.write("ann_importance_" + info.name + ".txt",
                      report::importance_text(info.name, run.importance));
        emitter.write("ann_importance_" + info.name + ".json",
                      report::importance_json(info.name, run.importance));

        AnnConfig full_config = ann_config;
        const AnnModel full = train_scg(x, y, full_config);
        emitter.write("ann_model_" + info.name + ".json",
                      ann_model_to_json(full));
        runs.push_back(std::move(run));
      }
      (void)m;
      if (runs.empty())
        result.warnings.push_back(
            "ann: no endogenous target had 2+ significant predictors");
    } catch (const Error& e) {
      throw fail(e.what());
    }
    done();

    // ---- SEM vs ANN ranking comparison
    current = Stage::Compare;
    try {
      std::vector<report::ComparisonSection> sections;
      for (const auto& run : runs) {
        std::vector<std::pair<std::string, double>> sem_paths, nri;
        for (std::size_t k = 0; k < run.inputs.size(); ++k) {
          const auto* est = sem.find_path(run.target, run.inputs[k]);
          sem_paths.push_back({run.inputs[k], est ? est->standardized : 0.0});
          nri.push_back({run.inputs[k],
                         run.importance.nri_percent(
                             static_cast<Eigen::Index>(k))});
        }
        sections.push_back({run.target, compare_sem_ann(sem_paths, nri)});
      }
      if (!sections.empty()) {
        emitter.write("sem_ann_comparison.txt",
                      report::comparison_text(sections));
        emitter.write("sem_ann_comparison.json",
                      report::comparison_json(sections));
        done();
      } else {
        stages.push_back({stage_name(current), "skipped"});
      }
    } catch (const Error& e) {
      throw fail(e.what());
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw fail(e.what());
  }

  result.completed = true;
  write_manifest(emitter, config.seed, stages, result.warnings, true);
  for (const auto& [name, _] : emitter.files) result.files.push_back(name);
  return result;
}

}  // namespace semann
