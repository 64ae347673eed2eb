// Command-line front end for the survey-analysis pipeline: each analysis
// stage is exposed as a subcommand, plus `simulate` for synthetic data and
// `pipeline` for the full two-stage run.

#include <CLI11.hpp>
#include <Eigen/Cholesky>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semann/ann.hpp"
#include "semann/bundled.hpp"
#include "semann/errors.hpp"
#include "semann/importance.hpp"
#include "semann/ingest.hpp"
#include "semann/mediation.hpp"
#include "semann/pipeline.hpp"
#include "semann/psychometrics.hpp"
#include "semann/report.hpp"
#include "semann/rng.hpp"
#include "semann/sem_fit.hpp"
#include "semann/stats.hpp"
#include "semann/synth.hpp"

namespace {

using namespace semann;
namespace fs = std::filesystem;

constexpr int kUsageExit = 64;
constexpr int kSimulateExit = 20;

struct CommonArgs {
  std::string data_path;
  std::string model_path;
  std::string out_dir;
  std::string format = "text";
  bool continuous_items = false;
  std::uint64_t seed = 1;
  int workers = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_data = true) {
  if (needs_data)
    cmd->add_option("--data", args.data_path, "survey CSV file")->required();
  cmd->add_option("--model", args.model_path,
                  "model description file (default: bundled survey model)");
  if (const char* env_out = std::getenv("SEMANN_OUT_DIR"))
    args.out_dir = env_out;
  cmd->add_option("--out", args.out_dir,
                  "output directory (default: stdout; SEMANN_OUT_DIR "
                  "overrides the default)");
  cmd->add_option("--format", args.format, "text|json for stdout output")
      ->check(CLI::IsMember({"text", "json"}));
  cmd->add_flag("--continuous-items", args.continuous_items,
                "accept non-integer item values (simulator output)");
  cmd->add_option("--seed", args.seed, "random seed");
  cmd->add_option("--workers", args.workers,
                  "worker threads (0 = hardware concurrency)");
}

ModelSpec load_model(const CommonArgs& args) {
  return args.model_path.empty() ? bundled_model()
                                 : parse_model_file(args.model_path);
}

Dataset load_data(const CommonArgs& args, const ModelSpec& spec) {
  LoadOptions options;
  options.likert_items = !args.continuous_items;
  LoadResult r = load_csv(args.data_path, spec, options);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  return std::move(r.data);
}

// Emit a (text, json) pair either to stdout (per --format) or as files.
void emit(const CommonArgs& args, const std::string& name,
          const std::string& text, const std::string& json) {
  if (args.out_dir.empty()) {
    std::cout << (args.format == "json" ? json : text);
    return;
  }
  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  std::ofstream(dir / (name + ".txt")) << text;
  std::ofstream(dir / (name + ".json")) << json;
  std::cout << (dir / (name + ".txt")).string() << "\n"
            << (dir / (name + ".json")).string() << "\n";
}

// Run a subcommand body; schema/loading failures map to the ingest exit
// code, anything else to the command's own stage code.
void run_stage(Stage stage, const std::function<void()>& body) {
  try {
    body();
    std::exit(0);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::exit(stage_exit_code(Stage::Ingest));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::exit(stage_exit_code(stage));
  }
}

void run_with_code(int failure_code, const std::function<void()>& body) {
  try {
    body();
    std::exit(0);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::exit(failure_code);
  }
}

SemFit run_cfa(const ModelSpec& spec, const Dataset& data) {
  FitOptions options;
  options.mode = SemMode::Measurement;
  return fit_ml(spec, data, options);
}

std::vector<report::ReliabilityRow> reliability_rows(
    const ModelSpec& spec, const Dataset& data, const SemFit& cfa,
    std::vector<double>* aves) {
  std::vector<report::ReliabilityRow> rows;
  for (const auto& construct : spec.measurement) {
    report::ReliabilityRow row;
    row.construct = construct.name;
    row.items = construct.items;
    row.loadings = cfa.standardized_loadings(construct.name);
    for (const auto& item : construct.items) {
      const auto* est = cfa.find(construct.name + "=~" + item);
      row.loading_stars.push_back(est ? est->stars : "");
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
    if (aves) aves->push_back(conv.ave);
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXd variable_values(const ModelSpec& spec, const Dataset& data,
                                const SemFit* cfa, bool factor_features,
                                const std::string& name) {
  if (spec.has_construct(name)) {
    if (factor_features && cfa) {
      const Eigen::MatrixXd x = cfa->model.observed_matrix(data);
      const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
      const Eigen::MatrixXd c = latent_covariance(cfa->params);
      Eigen::LLT<Eigen::MatrixXd> llt(cfa->implied);
      const Eigen::MatrixXd scores =
          centered * llt.solve(cfa->params.lambda * c);
      return scores.col(cfa->model.latent_index(name));
    }
    return construct_mean_scores(data, spec, name);
  }
  if (data.demographic_index(name) >= 0) return data.demographic_values(name);
  if (name == data.outcome_name) return data.outcome;
  throw ConfigError("no data column for variable '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "semann: two-stage survey analysis (covariance-structure estimation + "
      "neural-network importance)"};
  app.require_subcommand(1);

  // ---- describe
  CommonArgs describe_args;
  auto* describe_cmd =
      app.add_subcommand("describe", "frequency tables, outcome mean and SD");
  add_common(describe_cmd, describe_args);
  describe_cmd->callback([&] {
    run_stage(Stage::Describe, [&] {
      const ModelSpec spec = load_model(describe_args);
      const Dataset data = load_data(describe_args, spec);
      const auto demo = describe_demographics(data);
      const auto outcome = describe_outcome(data);
      emit(describe_args, "descriptives",
           report::descriptives_text(demo, data.outcome_name, outcome),
           report::descriptives_json(demo, data.outcome_name, outcome));
    });
  });

  // ---- anova
  CommonArgs anova_args;
  std::string anova_factor, anova_dependent;
  auto* anova_cmd = app.add_subcommand(
      "anova",
      "one-way ANOVA battery of demographics against construct scores");
  add_common(anova_cmd, anova_args);
  anova_cmd->add_option("--factor", anova_factor, "restrict to one factor");
  anova_cmd->add_option("--dependent", anova_dependent,
                        "restrict to one construct");
  anova_cmd->callback([&] {
    run_stage(Stage::Anova, [&] {
      const ModelSpec spec = load_model(anova_args);
      const Dataset data = load_data(anova_args, spec);
      std::vector<report::AnovaRow> rows;
      for (const auto& field : data.demographic_fields) {
        if (!anova_factor.empty() && field.name != anova_factor) continue;
        for (const auto& construct : spec.measurement) {
          if (!anova_dependent.empty() && construct.name != anova_dependent)
            continue;
          rows.push_back(
              {field.name, construct.name,
               one_way_anova(data, spec, field.name, construct.name)});
        }
      }
      emit(anova_args, "anova", report::anova_text(rows),
           report::anova_json(rows));
    });
  });

  // ---- reliability
  CommonArgs rel_args;
  auto* rel_cmd = app.add_subcommand(
      "reliability",
      "alpha, AVE, CR, and discriminant validity from the measurement fit");
  add_common(rel_cmd, rel_args);
  rel_cmd->callback([&] {
    run_stage(Stage::Measurement, [&] {
      const ModelSpec spec = load_model(rel_args);
      const Dataset data = load_data(rel_args, spec);
      const SemFit cfa = run_cfa(spec, data);
      std::vector<double> aves;
      const auto rows = reliability_rows(spec, data, cfa, &aves);
      const DiscriminantMatrix disc = discriminant_validity(
          cfa.latent_names, aves, cfa.latent_correlations);
      emit(rel_args, "reliability", report::reliability_text(rows),
           report::reliability_json(rows));
      emit(rel_args, "discriminant", report::discriminant_text(disc),
           report::discriminant_json(disc));
    });
  });

  // ---- cfa
  CommonArgs cfa_args;
  auto* cfa_cmd = app.add_subcommand(
      "cfa", "measurement-model fit indices and standardized loadings");
  add_common(cfa_cmd, cfa_args);
  cfa_cmd->callback([&] {
    run_stage(Stage::Measurement, [&] {
      const ModelSpec spec = load_model(cfa_args);
      const Dataset data = load_data(cfa_args, spec);
      const SemFit cfa = run_cfa(spec, data);
      emit(cfa_args, "measurement_fit",
           report::fit_indices_text(cfa.fit) + "\n" +
               report::estimates_text(cfa),
           report::sem_fit_json(cfa));
    });
  });

  // ---- sem
  CommonArgs sem_args;
  auto* sem_cmd = app.add_subcommand(
      "sem", "structural fit, hypothesis verdicts, and control effects");
  add_common(sem_cmd, sem_args);
  sem_cmd->callback([&] {
    run_stage(Stage::Structural, [&] {
      const ModelSpec spec = load_model(sem_args);
      const Dataset data = load_data(sem_args, spec);
      FitOptions options;
      options.mode = SemMode::Structural;
      const SemFit fit = fit_ml(spec, data, options);
      emit(sem_args, "structural_fit",
           report::fit_indices_text(fit.fit) + "\n" +
               report::estimates_text(fit),
           report::sem_fit_json(fit));
      if (!spec.hypotheses.empty()) {
        const auto rows = test_hypotheses(fit, spec.hypotheses);
        emit(sem_args, "hypotheses", report::hypotheses_text(rows),
             report::hypotheses_json(rows));
      }
      const auto controls = report::control_effects(fit);
      if (!controls.empty())
        emit(sem_args, "control_effects",
             report::control_effects_text(controls),
             report::control_effects_json(controls));
    });
  });

  // ---- mediate
  CommonArgs med_args;
  int med_replicates = 2000;
  double med_level = 0.95;
  auto* med_cmd = app.add_subcommand(
      "mediate", "bootstrap direct/indirect effects for the model's chains");
  add_common(med_cmd, med_args);
  med_cmd->add_option("--replicates", med_replicates,
                      "bootstrap replicates (>= 200)");
  med_cmd->add_option("--level", med_level, "confidence level, e.g. 0.95");
  med_cmd->callback([&] {
    run_stage(Stage::Mediation, [&] {
      const ModelSpec spec = load_model(med_args);
      const Dataset data = load_data(med_args, spec);
      if (spec.mediations.empty())
        throw ConfigError("model declares no mediation chains");
      MediationOptions options;
      options.replicates = med_replicates;
      options.level = med_level;
      options.seed = med_args.seed;
      options.workers = med_args.workers;
      const MediationRun run =
          bootstrap_mediation(spec, data, spec.mediations, options);
      emit(med_args, "mediation", report::mediation_text(run),
           report::mediation_json(run));
    });
  });

  // ---- ann
  CommonArgs ann_args;
  std::vector<int> ann_hidden = {8, 4};
  int ann_folds = 10;
  double ann_threshold = 0.05;
  std::string ann_target;
  std::vector<std::string> ann_inputs;
  std::string ann_features = "mean";
  auto* ann_cmd = app.add_subcommand(
      "ann",
      "cross-validated network RMSE and permutation importance; targets "
      "promoted from the structural fit unless --target is given");
  add_common(ann_cmd, ann_args);
  ann_cmd->add_option("--hidden", ann_hidden, "two hidden-layer sizes")
      ->expected(2);
  ann_cmd->add_option("--folds", ann_folds, "cross-validation folds");
  ann_cmd->add_option("--threshold", ann_threshold,
                      "significance threshold for promotion");
  ann_cmd->add_option("--target", ann_target, "train one explicit target");
  ann_cmd->add_option("--inputs", ann_inputs,
                      "explicit input variables (with --target)");
  ann_cmd->add_option("--features", ann_features,
                      "latent feature values: mean|factor")
      ->check(CLI::IsMember({"mean", "factor"}));
  ann_cmd->callback([&] {
    run_stage(Stage::Ann, [&] {
      const ModelSpec spec = load_model(ann_args);
      const Dataset data = load_data(ann_args, spec);
      const bool factor_features = ann_features == "factor";
      SemFit cfa;
      if (factor_features) cfa = run_cfa(spec, data);

      struct Job {
        std::string target;
        std::vector<std::string> inputs;
      };
      std::vector<Job> jobs;
      if (!ann_target.empty()) {
        if (ann_inputs.size() < 2)
          throw ConfigError("--target needs --inputs with at least 2 names");
        jobs.push_back({ann_target, ann_inputs});
      } else {
        FitOptions options;
        options.mode = SemMode::Structural;
        const SemFit sem = fit_ml(spec, data, options);
        for (const auto& info : sem.model.latents()) {
          if (!info.endogenous) continue;
          std::vector<std::string> inputs;
          for (const auto& r : spec.structural) {
            if (r.target != info.name) continue;
            for (const auto& pred : r.predictors) {
              const auto* est = sem.find_path(info.name, pred);
              if (est && est->p < ann_threshold) inputs.push_back(pred);
            }
          }
          if (inputs.size() >= 2) jobs.push_back({info.name, inputs});
        }
        if (jobs.empty())
          throw DataError("no endogenous target has 2+ significant predictors");
      }

      for (std::size_t j = 0; j < jobs.size(); ++j) {
        const auto& job = jobs[j];
        Eigen::MatrixXd x(data.n_rows(),
                          static_cast<Eigen::Index>(job.inputs.size()));
        for (std::size_t k = 0; k < job.inputs.size(); ++k)
          x.col(static_cast<Eigen::Index>(k)) = variable_values(
              spec, data, &cfa, factor_features, job.inputs[k]);
        const Eigen::VectorXd y =
            variable_values(spec, data, &cfa, factor_features, job.target);

        AnnConfig config;
        config.hidden_sizes = {ann_hidden[0], ann_hidden[1]};
        config.folds = ann_folds;
        config.workers = ann_args.workers;
        config.seed =
            Rng::derive(ann_args.seed, 0x616e6e, static_cast<std::uint64_t>(j))
                .next_u64();
        const CvResult cv = cross_validate(x, y, config);
        const ImportanceReport imp =
            permutation_importance(cv, x, y, job.inputs, config);
        emit(ann_args, "ann_rmse_" + job.target,
             report::cv_text(job.target, cv), report::cv_json(job.target, cv));
        emit(ann_args, "ann_importance_" + job.target,
             report::importance_text(job.target, imp),
             report::importance_json(job.target, imp));
        if (!ann_args.out_dir.empty()) {
          const AnnModel full = train_scg(x, y, config);
          std::ofstream(fs::path(ann_args.out_dir) /
                        ("ann_model_" + job.target + ".json"))
              << ann_model_to_json(full);
        }
      }
    });
  });

  // ---- compare
  CommonArgs cmp_args;
  std::string cmp_pairs;
  auto* cmp_cmd = app.add_subcommand(
      "compare",
      "rank agreement between path coefficients and importance percentages");
  add_common(cmp_cmd, cmp_args, /*needs_data=*/false);
  cmp_cmd
      ->add_option("--pairs", cmp_pairs,
                   "JSON file: [{label, sem, nri}, ...] or {target: [rows]}")
      ->required();
  cmp_cmd->callback([&] {
    run_stage(Stage::Compare, [&] {
      std::ifstream in(cmp_pairs);
      if (!in) throw DataError("cannot open " + cmp_pairs);
      nlohmann::ordered_json doc;
      in >> doc;
      std::vector<report::ComparisonSection> sections;
      auto one_section = [](const nlohmann::ordered_json& rows,
                            const std::string& name) {
        std::vector<std::pair<std::string, double>> sem_paths, nri;
        for (const auto& row : rows) {
          sem_paths.push_back({row.at("label").get<std::string>(),
                               row.at("sem").get<double>()});
          nri.push_back({row.at("label").get<std::string>(),
                         row.at("nri").get<double>()});
        }
        return report::ComparisonSection{name,
                                         compare_sem_ann(sem_paths, nri)};
      };
      if (doc.is_array()) {
        sections.push_back(one_section(doc, "comparison"));
      } else {
        for (const auto& [key, rows] : doc.items())
          sections.push_back(one_section(rows, key));
      }
      emit(cmp_args, "sem_ann_comparison", report::comparison_text(sections),
           report::comparison_json(sections));
    });
  });

  // ---- simulate
  CommonArgs sim_args;
  std::string sim_truth_path;
  int sim_n = 603;
  std::string sim_mode = "likert";
  auto* sim_cmd = app.add_subcommand(
      "simulate", "draw a synthetic dataset from a generating truth");
  add_common(sim_cmd, sim_args, /*needs_data=*/false);
  sim_cmd->add_option("--truth", sim_truth_path,
                      "truth JSON (default: bundled generating model)");
  sim_cmd->add_option("--n", sim_n, "rows to draw");
  sim_cmd->add_option("--mode", sim_mode, "likert|continuous item emission")
      ->check(CLI::IsMember({"likert", "continuous"}));
  sim_cmd->callback([&] {
    run_with_code(kSimulateExit, [&] {
      SynthTruth truth;
      if (sim_truth_path.empty()) {
        truth = bundled_truth(sim_n, sim_args.seed, sim_mode == "likert");
      } else {
        std::ifstream in(sim_truth_path);
        if (!in) throw DataError("cannot open " + sim_truth_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        truth = truth_from_json(buf.str());
        truth.n = sim_n;
        truth.seed = sim_args.seed;
        truth.discretize_items = sim_mode == "likert";
      }
      const Dataset data = generate(truth);
      if (sim_args.out_dir.empty())
        throw ConfigError("simulate requires --out");
      fs::create_directories(sim_args.out_dir);
      const fs::path dir(sim_args.out_dir);
      std::ofstream(dir / "data.csv") << to_csv_text(data);
      std::ofstream(dir / "truth.json") << truth_to_json(truth);
      std::ofstream(dir / "model.txt") << to_model_text(truth.spec);
      std::cout << (dir / "data.csv").string() << "\n"
                << (dir / "truth.json").string() << "\n"
                << (dir / "model.txt").string() << "\n";
    });
  });

  // ---- screen
  CommonArgs screen_args;
  double screen_min_seconds = 80.0;
  bool screen_no_dedupe = false;
  std::string screen_rules_path;
  auto* screen_cmd = app.add_subcommand(
      "screen", "apply quality-control rules and emit the exclusion log");
  add_common(screen_cmd, screen_args);
  screen_cmd->add_option("--min-seconds", screen_min_seconds,
                         "minimum completion time (0 disables)");
  screen_cmd->add_flag("--no-dedupe", screen_no_dedupe,
                       "disable the device-limit rule");
  screen_cmd->add_option("--rules", screen_rules_path,
                         "consistency rules JSON: [{name, field, level, "
                         "conflicting_field, conflicting_level}]");
  screen_cmd->callback([&] {
    run_stage(Stage::Screen, [&] {
      const ModelSpec spec = load_model(screen_args);
      const Dataset data = load_data(screen_args, spec);
      ScreeningRules rules;
      rules.min_completion_seconds = screen_min_seconds;
      rules.dedupe_by_source = !screen_no_dedupe;
      if (!screen_rules_path.empty()) {
        std::ifstream in(screen_rules_path);
        if (!in) throw DataError("cannot open " + screen_rules_path);
        nlohmann::ordered_json doc;
        in >> doc;
        for (const auto& r : doc)
          rules.consistency.push_back(
              {r.at("name").get<std::string>(),
               r.at("field").get<std::string>(),
               r.at("level").get<std::string>(),
               r.at("conflicting_field").get<std::string>(),
               r.at("conflicting_level").get<std::string>()});
      }
      const ScreenResult result = screen(data, rules);
      if (screen_args.out_dir.empty())
        throw ConfigError("screen requires --out");
      fs::create_directories(screen_args.out_dir);
      const fs::path dir(screen_args.out_dir);
      std::ofstream(dir / "screened.csv") << to_csv_text(result.data);
      std::ofstream(dir / "exclusion_log.csv")
          << exclusion_log_csv(result.log);
      std::cout << (dir / "screened.csv").string() << "\n"
                << (dir / "exclusion_log.csv").string() << "\n";
    });
  });

  // ---- pipeline
  CommonArgs pipe_args;
  int pipe_replicates = 2000;
  int pipe_folds = 10;
  std::vector<int> pipe_hidden = {8, 4};
  double pipe_threshold = 0.05;
  std::string pipe_features = "mean";
  auto* pipe_cmd =
      app.add_subcommand("pipeline", "run every stage and write the bundle");
  add_common(pipe_cmd, pipe_args);
  pipe_cmd->add_option("--replicates", pipe_replicates, "bootstrap replicates");
  pipe_cmd->add_option("--folds", pipe_folds, "cross-validation folds");
  pipe_cmd->add_option("--hidden", pipe_hidden, "two hidden-layer sizes")
      ->expected(2);
  pipe_cmd->add_option("--threshold", pipe_threshold,
                       "significance threshold for promotion");
  pipe_cmd->add_option("--features", pipe_features,
                       "latent feature values: mean|factor")
      ->check(CLI::IsMember({"mean", "factor"}));
  pipe_cmd->callback([&] {
    PipelineConfig config;
    config.data_path = pipe_args.data_path;
    config.model_path = pipe_args.model_path;
    config.output_dir =
        pipe_args.out_dir.empty() ? "semann-out" : pipe_args.out_dir;
    config.seed = pipe_args.seed;
    config.bootstrap_replicates = pipe_replicates;
    config.folds = pipe_folds;
    config.hidden_sizes = {pipe_hidden[0], pipe_hidden[1]};
    config.significance_threshold = pipe_threshold;
    config.workers = pipe_args.workers;
    config.likert_items = !pipe_args.continuous_items;
    config.ann_features = pipe_features == "factor"
                              ? AnnFeatureSource::FactorScores
                              : AnnFeatureSource::MeanScores;
    try {
      const PipelineResult result = run_pipeline(config);
      for (const auto& w : result.warnings)
        std::cerr << "warning: " << w << "\n";
      std::cout << "wrote " << result.files.size() << " files to "
                << config.output_dir << "\n";
      std::exit(0);
    } catch (const StageError& e) {
      std::cerr << "error: " << e.what() << "\n";
      std::exit(stage_exit_code(e.stage()));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      std::exit(stage_exit_code(Stage::Ingest));
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the usage message
    return code == 0 ? 0 : kUsageExit;
  }
  return 0;
}
