#include <doctest.h>

#include <cmath>

#include "semann/errors.hpp"
#include "semann/mediation.hpp"
#include "semann/sem_fit.hpp"
#include "semann/synth.hpp"

using namespace semann;

namespace {

ModelSpec chain_spec() {
  return parse_model(
      "X =~ x1 + x2 + x3\n"
      "M =~ m1 + m2 + m3\n"
      "Y =~ y1 + y2 + y3\n"
      "M ~ X\n"
      "Y ~ M + X\n"
      "mediation: X -> M -> Y\n");
}

Dataset chain_data(int n, std::uint64_t seed, double a, double b, double c) {
  SynthTruth truth;
  truth.spec = chain_spec();
  truth.n = n;
  truth.seed = seed;
  truth.discretize_items = false;
  const SemModel model = SemModel::build(truth.spec, SemMode::Structural);
  truth.params = standardized_parameters(
      model,
      {{"X", {0.8, 0.7, 0.6}}, {"M", {0.75, 0.8, 0.7}}, {"Y", {0.7, 0.65, 0.8}}},
      {{"M~X", a}, {"Y~M", b}, {"Y~X", c}},
      Eigen::MatrixXd::Identity(1, 1));
  return generate(truth);
}

bool records_equal(const MediationRecord& a, const MediationRecord& b) {
  return a.direct == b.direct && a.indirect == b.indirect &&
         a.direct_lo == b.direct_lo && a.direct_hi == b.direct_hi &&
         a.indirect_lo == b.indirect_lo && a.indirect_hi == b.indirect_hi &&
         a.direct_stars == b.direct_stars &&
         a.indirect_stars == b.indirect_stars &&
         a.classification == b.classification;
}

}  // namespace

TEST_CASE("point estimate equals the product of the fitted paths") {
  const ModelSpec spec = chain_spec();
  const Dataset data = chain_data(400, 3, 0.5, 0.4, 0.2);

  MediationOptions options;
  options.replicates = 200;
  options.seed = 11;
  const MediationRun run =
      bootstrap_mediation(spec, data, spec.mediations, options);
  REQUIRE(run.records.size() == 1);

  FitOptions fit_options;
  fit_options.mode = SemMode::Structural;
  fit_options.compute_se = false;
  const SemFit fit = fit_ml(spec, data, fit_options);
  const double a = fit.find_path("M", "X")->standardized;
  const double b = fit.find_path("Y", "M")->standardized;
  CHECK(run.records[0].indirect == doctest::Approx(a * b).epsilon(1e-10));
  CHECK(run.records[0].direct ==
        doctest::Approx(fit.find_path("Y", "X")->standardized).epsilon(1e-10));
  CHECK(run.replicates_used + (run.replicates_requested - run.replicates_used) ==
        options.replicates);
}

TEST_CASE("partial mediation when both effects are present") {
  const ModelSpec spec = chain_spec();
  const Dataset data = chain_data(600, 5, 0.5, 0.4, 0.3);
  MediationOptions options;
  options.replicates = 300;
  options.seed = 2;
  const MediationRun run =
      bootstrap_mediation(spec, data, spec.mediations, options);
  CHECK(run.records[0].classification == "partial");
  CHECK(run.records[0].indirect_stars != "");
  CHECK(run.records[0].indirect_lo < run.records[0].indirect_hi);
}

TEST_CASE("zero generating path classifies as none") {
  const ModelSpec spec = chain_spec();
  const Dataset data = chain_data(600, 7, 0.0, 0.4, 0.3);
  MediationOptions options;
  options.replicates = 300;
  options.seed = 6;
  const MediationRun run =
      bootstrap_mediation(spec, data, spec.mediations, options);
  CHECK(std::fabs(run.records[0].indirect) < 0.05);
  CHECK(run.records[0].classification == "none");
}

TEST_CASE("full mediation when the direct path vanishes") {
  const ModelSpec spec = chain_spec();
  const Dataset data = chain_data(800, 9, 0.5, 0.4, 0.0);
  MediationOptions options;
  options.replicates = 300;
  options.seed = 8;
  const MediationRun run =
      bootstrap_mediation(spec, data, spec.mediations, options);
  CHECK(run.records[0].classification == "full");
}

TEST_CASE("fixed seed is bitwise reproducible across worker counts") {
  const ModelSpec spec = chain_spec();
  const Dataset data = chain_data(300, 13, 0.5, 0.4, 0.2);
  MediationOptions serial;
  serial.replicates = 200;
  serial.seed = 21;
  serial.workers = 1;
  MediationOptions parallel = serial;
  parallel.workers = 4;

  const MediationRun a = bootstrap_mediation(spec, data, spec.mediations, serial);
  const MediationRun b =
      bootstrap_mediation(spec, data, spec.mediations, parallel);
  REQUIRE(a.records.size() == b.records.size());
  CHECK(a.replicates_used == b.replicates_used);
  for (std::size_t i = 0; i < a.records.size(); ++i)
    CHECK(records_equal(a.records[i], b.records[i]));
}

TEST_CASE("interval endpoints settle as replicates grow") {
  const ModelSpec spec = chain_spec();
  const Dataset data = chain_data(400, 17, 0.5, 0.4, 0.2);
  MediationOptions small;
  small.replicates = 500;
  small.seed = 4;
  MediationOptions large = small;
  large.replicates = 2000;
  const MediationRun a = bootstrap_mediation(spec, data, spec.mediations, small);
  const MediationRun b = bootstrap_mediation(spec, data, spec.mediations, large);
  CHECK(std::fabs(a.records[0].indirect_lo - b.records[0].indirect_lo) < 0.02);
  CHECK(std::fabs(a.records[0].indirect_hi - b.records[0].indirect_hi) < 0.02);
}

TEST_CASE("small replicate counts and unknown chains are rejected") {
  const ModelSpec spec = chain_spec();
  const Dataset data = chain_data(200, 19, 0.5, 0.4, 0.2);
  MediationOptions options;
  options.replicates = 100;
  CHECK_THROWS_AS(bootstrap_mediation(spec, data, spec.mediations, options),
                  ConfigError);
  options.replicates = 200;
  CHECK_THROWS_AS(
      bootstrap_mediation(spec, data, {{"M", "X", "Y"}}, options),
      ConfigError);  // no path X ~ M in the model
}

TEST_CASE("confidence interval covers a known indirect effect") {
  // spot check of the coverage property (the acceptance suite runs the
  // full 100-trial version)
  int covered = 0;
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    const ModelSpec spec = chain_spec();
    const Dataset data = chain_data(500, 100 + trial, 0.5, 0.4, 0.2);
    MediationOptions options;
    options.replicates = 300;
    options.seed = trial;
    const MediationRun run =
        bootstrap_mediation(spec, data, spec.mediations, options);
    if (run.records[0].indirect_lo <= 0.2 && 0.2 <= run.records[0].indirect_hi)
      ++covered;
  }
  CHECK(covered >= 4);
}
