#include "semann/bundled.hpp"

#include <map>

#include "semann/errors.hpp"

namespace semann {

const std::string& bundled_model_text() {
  static const std::string text = R"(# Survey analysis model: pedestrian gap acceptance of automated truck platoons
# Measurement map (five-point Likert items)
UT =~ UT1 + UT2 + UT3 + UT4
TST =~ TST1 + TST2 + TST3
UADT =~ UADT1 + UADT2 + UADT3
TSADT =~ TSADT1 + TSADT2 + TSADT3
Violations =~ Violation1 + Violation2 + Violation3 + Violation4
Errors =~ Error1 + Error2 + Error3 + Error4
Lapses =~ Lapse1 + Lapse2 + Lapse3 + Lapse4
Aggressive =~ Aggressive1 + Aggressive2 + Aggressive3 + Aggressive4
Positive =~ Positive1 + Positive2 + Positive3 + Positive4
TSAT =~ TSAT1 + TSAT2 + TSAT3 + TSAT4 + TSAT5 + TSAT6
RP =~ RP1 + RP2 + RP3 + RP4

# Demographic covariates (ordered level lists define the integer coding)
control: gender(female, male)
control: age_group(under_35, 35_plus)
control: education(junior_high_or_below, high_school, college, postgraduate)
control: license(no, yes)
control: driving_years(none, under_1, 1_to_3, 3_to_5, over_5)
control: transport_practitioner(no, yes)
control: collision_experience(no, yes)

# Observed behavioral outcome: accepted inter-truck time gap in seconds
outcome: gap_seconds

# Structural model; demographics enter every equation as controls
UT ~ gender + age_group + education + license + driving_years + transport_practitioner + collision_experience
UADT ~ gender + age_group + education + license + driving_years + transport_practitioner + collision_experience
TST ~ UT + gender + age_group + education + license + driving_years + transport_practitioner + collision_experience
TSADT ~ UADT + gender + age_group + education + license + driving_years + transport_practitioner + collision_experience
TSAT ~ UT + UADT + TST + TSADT + gender + age_group + education + license + driving_years + transport_practitioner + collision_experience
RP ~ TSAT + TST + TSADT + Positive + Errors + Aggressive + gender + age_group + education + license + driving_years + transport_practitioner + collision_experience
gap_seconds ~ RP + TSAT + Positive + Violations + Errors + Aggressive + gender + age_group + education + license + driving_years + transport_practitioner + collision_experience

hypothesis: H1 UT -> TST +
hypothesis: H2 UADT -> TSADT +
hypothesis: H3 UT -> TSAT +
hypothesis: H4 UADT -> TSAT +
hypothesis: H5 TST -> TSAT +
hypothesis: H6 TSADT -> TSAT +
hypothesis: H7 TSAT -> gap_seconds -
hypothesis: H8 RP -> gap_seconds +
hypothesis: H9 TSAT -> RP -
hypothesis: H10 Positive -> RP +
hypothesis: H11a Positive -> gap_seconds +
hypothesis: H11b Violations -> gap_seconds -
hypothesis: H11c Errors -> gap_seconds -
hypothesis: H11d Aggressive -> gap_seconds -

mediation: UT -> TST -> TSAT
mediation: UADT -> TSADT -> TSAT
mediation: TST -> TSAT -> RP
mediation: TSADT -> TSAT -> RP
mediation: TSAT -> RP -> gap_seconds
mediation: Positive -> RP -> gap_seconds
mediation: Aggressive -> RP -> gap_seconds
mediation: Errors -> RP -> gap_seconds
)";
  return text;
}

ModelSpec bundled_model() { return parse_model(bundled_model_text()); }

SynthTruth bundled_truth(int n, std::uint64_t seed, bool discretize_items) {
  SynthTruth truth;
  truth.spec = bundled_model();
  truth.n = n;
  truth.seed = seed;
  truth.discretize_items = discretize_items;
  truth.outcome_location = 5.35;
  truth.outcome_scale = 1.43;

  const SemModel model = SemModel::build(truth.spec, SemMode::Structural);

  const std::map<std::string, std::vector<double>> loadings = {
      {"UT", {0.74, 0.76, 0.80, 0.82}},
      {"TST", {0.76, 0.70, 0.83}},
      {"UADT", {0.78, 0.79, 0.78}},
      {"TSADT", {0.81, 0.77, 0.75}},
      {"Violations", {0.81, 0.77, 0.82, 0.791}},
      {"Errors", {0.76, 0.78, 0.68, 0.78}},
      {"Lapses", {0.76, 0.85, 0.80, 0.86}},
      {"Aggressive", {0.85, 0.84, 0.86, 0.83}},
      {"Positive", {0.75, 0.78, 0.79, 0.78}},
      {"TSAT", {0.83, 0.80, 0.83, 0.75, 0.74, 0.80}},
      {"RP", {0.71, 0.78, 0.67, 0.71}},
  };

  const std::map<std::string, double> paths = {
      {"UT~age_group", 0.11},
      {"UT~education", -0.15},
      {"UT~driving_years", 0.18},
      {"UT~transport_practitioner", 0.23},
      {"UADT~driving_years", 0.16},
      {"UADT~transport_practitioner", 0.22},
      {"TST~UT", 0.48},
      {"TST~age_group", -0.09},
      {"TST~education", 0.09},
      {"TST~gender", -0.09},
      {"TSADT~UADT", 0.71},
      {"TSAT~UT", 0.28},
      {"TSAT~UADT", 0.37},
      {"TSAT~TST", 0.14},
      {"TSAT~TSADT", 0.38},
      {"TSAT~license", -0.10},
      {"RP~TSAT", -0.17},
      {"RP~TST", -0.07},
      {"RP~TSADT", -0.03},
      {"RP~Positive", 0.23},
      {"RP~Errors", -0.36},
      {"RP~Aggressive", -0.12},
      {"gap_seconds~RP", 0.49},
      {"gap_seconds~TSAT", -0.02},
      {"gap_seconds~Positive", 0.30},
      {"gap_seconds~Violations", -0.16},
      {"gap_seconds~Errors", 0.02},
      {"gap_seconds~Aggressive", 0.06},
  };

  // Exogenous block: behavioral-tendency correlations, covariates independent.
  const int m = model.n_exogenous();
  Eigen::MatrixXd exo = Eigen::MatrixXd::Identity(m, m);
  auto idx = [&](const char* name) {
    const int i = model.latent_index(name);
    if (i < 0 || i >= m) throw ConfigError("bundled_truth: bad exogenous name");
    return i;
  };
  auto set = [&](const char* a, const char* b, double r) {
    exo(idx(a), idx(b)) = r;
    exo(idx(b), idx(a)) = r;
  };
  set("Violations", "Errors", 0.49);
  set("Violations", "Lapses", 0.69);
  set("Violations", "Aggressive", 0.48);
  set("Violations", "Positive", -0.64);
  set("Errors", "Lapses", 0.64);
  set("Errors", "Aggressive", 0.42);
  set("Errors", "Positive", -0.59);
  set("Lapses", "Aggressive", 0.62);
  set("Lapses", "Positive", -0.73);
  set("Aggressive", "Positive", -0.62);

  truth.params = standardized_parameters(model, loadings, paths, exo);
  return truth;
}

}  // namespace semann
