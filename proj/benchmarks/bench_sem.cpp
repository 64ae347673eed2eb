#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "semann/bundled.hpp"
#include "semann/sem_fit.hpp"
#include "semann/synth.hpp"

namespace {

using namespace semann;

struct Fixture {
  ModelSpec spec = bundled_model();
  Dataset data = generate(bundled_truth(603, 7, true));
  SemModel model = SemModel::build(spec, SemMode::Structural);
  Eigen::MatrixXd x = model.observed_matrix(data);
  Eigen::MatrixXd s;
  double log_det_s = 0.0;
  Eigen::VectorXd theta0;

  Fixture() {
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    s = centered.transpose() * centered / double(x.rows() - 1);
    log_det_s = std::log(s.determinant());
    theta0 = model.start_values(data);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void bm_implied_covariance(benchmark::State& state) {
  auto& f = fixture();
  const SemParameters params = f.model.make_parameters(f.theta0);
  for (auto _ : state)
    benchmark::DoNotOptimize(implied_covariance(params));
}
BENCHMARK(bm_implied_covariance);

void bm_fml_gradient(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(f.model.fml_gradient(f.theta0, f.s));
}
BENCHMARK(bm_fml_gradient);

void bm_structural_fit(benchmark::State& state) {
  auto& f = fixture();
  FitOptions options;
  options.mode = SemMode::Structural;
  options.compute_se = false;
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_ml(f.spec, f.data, options));
}
BENCHMARK(bm_structural_fit)->Unit(benchmark::kMillisecond);

void bm_bootstrap_replicate_fit(benchmark::State& state) {
  auto& f = fixture();
  FitOptions cold;
  cold.mode = SemMode::Structural;
  cold.compute_se = false;
  const SemFit base = fit_ml(f.spec, f.data, cold);
  FitOptions warm = cold;
  warm.start = base.theta;
  std::vector<int> rows(static_cast<std::size_t>(f.data.n_rows()));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = int(i) / 2;
  const Dataset resampled = f.data.select_rows(rows);
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_ml(f.spec, resampled, warm));
}
BENCHMARK(bm_bootstrap_replicate_fit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
