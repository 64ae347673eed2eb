#include <doctest.h>

#include <cmath>

#include "semann/bundled.hpp"
#include "semann/errors.hpp"
#include "semann/ingest.hpp"
#include "semann/synth.hpp"

using namespace semann;

namespace {

SynthTruth one_factor(int n, std::uint64_t seed, bool discretize,
                      std::vector<double> loadings = {0.8, 0.7, 0.6}) {
  SynthTruth truth;
  truth.spec = parse_model("F =~ i1 + i2 + i3\n");
  truth.n = n;
  truth.seed = seed;
  truth.discretize_items = discretize;
  const SemModel model = SemModel::build(truth.spec, SemMode::Structural);
  truth.params = standardized_parameters(model, {{"F", std::move(loadings)}},
                                         {}, Eigen::MatrixXd::Identity(1, 1));
  return truth;
}

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  return centered.transpose() * centered / double(x.rows() - 1);
}

double max_corr_offdiag(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd s = sample_cov(x);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      worst = std::max(worst,
                       std::fabs(s(i, j) / std::sqrt(s(i, i) * s(j, j))));
  return worst;
}

}  // namespace

TEST_CASE("same seed reproduces the dataset exactly") {
  const SynthTruth truth = one_factor(200, 42, true);
  const Dataset a = generate(truth);
  const Dataset b = generate(truth);
  CHECK(a.items == b.items);
  CHECK(a.outcome == b.outcome);
  CHECK(to_csv_text(a) == to_csv_text(b));
  SynthTruth other = truth;
  other.seed = 43;
  CHECK(to_csv_text(generate(other)) != to_csv_text(a));
}

TEST_CASE("zero loadings produce independent items") {
  const SynthTruth truth = one_factor(10000, 3, false, {0.0, 0.0, 0.0});
  const Dataset d = generate(truth);
  CHECK(max_corr_offdiag(d.items) < 0.05);
}

TEST_CASE("sample covariance approaches the implied covariance") {
  const SynthTruth truth = one_factor(5000, 11, false);
  const Dataset d = generate(truth);
  const Eigen::MatrixXd implied = implied_covariance(truth.params);
  const Eigen::MatrixXd s = sample_cov(d.items);
  CHECK((s - implied).lpNorm<Eigen::Infinity>() < 0.06);
}

TEST_CASE("entrywise error shrinks with sample size") {
  // ~1/sqrt(N) convergence, checked as monotone decay of the median error
  // over 5 seeds per size
  const std::vector<int> sizes = {1000, 10000, 100000};
  std::vector<double> median_err;
  for (int n : sizes) {
    std::vector<double> errs;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const SynthTruth truth = one_factor(n, seed, false);
      const Dataset d = generate(truth);
      const Eigen::MatrixXd implied = implied_covariance(truth.params);
      errs.push_back(
          (sample_cov(d.items) - implied).lpNorm<Eigen::Infinity>());
    }
    std::sort(errs.begin(), errs.end());
    median_err.push_back(errs[2]);
  }
  CHECK(median_err[1] < median_err[0]);
  CHECK(median_err[2] < median_err[1]);
}

TEST_CASE("discretized mode stays on the five-point scale and keeps rank direction") {
  const SynthTruth cont = one_factor(4000, 9, false);
  SynthTruth disc = cont;
  disc.discretize_items = true;
  const Dataset dc = generate(cont);
  const Dataset dd = generate(disc);

  for (Eigen::Index i = 0; i < dd.items.rows(); ++i)
    for (Eigen::Index j = 0; j < dd.items.cols(); ++j) {
      const double v = dd.items(i, j);
      CHECK(v == std::floor(v));
      CHECK(v >= 1.0);
      CHECK(v <= 5.0);
    }

  // positive inter-item correlations stay positive after discretization
  const Eigen::MatrixXd sc = sample_cov(dc.items);
  const Eigen::MatrixXd sd = sample_cov(dd.items);
  for (Eigen::Index i = 0; i < sc.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      CHECK(sc(i, j) > 0.0);
      CHECK(sd(i, j) > 0.0);
    }
}

TEST_CASE("strictly increasing thresholds are required") {
  SynthTruth truth = one_factor(10, 1, true);
  truth.item_thresholds = {-1.0, -1.0, 0.5, 1.5};
  CHECK_THROWS_AS(generate(truth), ConfigError);
}

TEST_CASE("non-positive-definite phi is rejected") {
  SynthTruth truth;
  truth.spec = parse_model("A =~ a1 + a2\nB =~ b1 + b2\n");
  truth.n = 10;
  const SemModel model = SemModel::build(truth.spec, SemMode::Structural);
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 1.2, 1.2, 1.0;
  CHECK_THROWS_AS(
      standardized_parameters(model, {{"A", {0.7, 0.7}}, {"B", {0.7, 0.7}}}, {},
                              bad),
      ValidationError);
  truth.params = standardized_parameters(
      model, {{"A", {0.7, 0.7}}, {"B", {0.7, 0.7}}}, {},
      Eigen::MatrixXd::Identity(2, 2));
  truth.params.phi = bad;
  CHECK_THROWS_AS(generate(truth), ConfigError);
}

TEST_CASE("truth JSON round-trips") {
  const SynthTruth truth = bundled_truth(100, 5, true);
  const std::string text = truth_to_json(truth);
  const SynthTruth back = truth_from_json(text);
  CHECK(back.n == truth.n);
  CHECK(back.seed == truth.seed);
  CHECK(back.discretize_items == truth.discretize_items);
  CHECK(back.params.lambda.isApprox(truth.params.lambda, 1e-15));
  CHECK(back.params.phi.isApprox(truth.params.phi, 1e-15));
  CHECK(back.params.psi.isApprox(truth.params.psi, 1e-15));
  CHECK(to_csv_text(generate(back)) == to_csv_text(generate(truth)));
}

TEST_CASE("bundled truth emits the full survey schema") {
  const Dataset d = generate(bundled_truth(150, 2, true));
  CHECK(d.n_rows() == 150);
  CHECK(d.item_names.size() == 43);
  CHECK(d.demographic_fields.size() == 7);
  CHECK(d.outcome_name == "gap_seconds");
  CHECK(d.outcome.minCoeff() > 0.0);
  // loads back through ingest under the Likert contract
  const LoadResult r = load_csv_text(to_csv_text(d), bundled_model());
  CHECK(r.data.n_rows() == 150);
  CHECK(r.warnings.empty());
}
