#include <benchmark/benchmark.h>

#include "semann/ann.hpp"
#include "semann/importance.hpp"
#include "semann/rng.hpp"

namespace {

using namespace semann;

struct Fixture {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;

  Fixture() {
    Rng rng(99);
    x.resize(603, 4);
    y.resize(603);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
      y(i) = 0.6 * x(i, 0) - 0.3 * x(i, 1) * x(i, 1) + 0.1 * rng.normal();
    }
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void bm_mse_gradient(benchmark::State& state) {
  auto& f = fixture();
  AnnConfig config;
  const Mlp net(4, config.hidden_sizes);
  const Eigen::VectorXd w = net.init_weights(1);
  const MinMaxScaler sx = MinMaxScaler::fit(f.x, 0.05, 0.95);
  const MinMaxScaler sy = MinMaxScaler::fit(f.y, 0.05, 0.95);
  const Eigen::MatrixXd xs = sx.transform(f.x);
  const Eigen::VectorXd ys = sy.transform(f.y);
  Eigen::VectorXd grad;
  for (auto _ : state)
    benchmark::DoNotOptimize(net.mse_gradient(w, xs, ys, grad));
}
BENCHMARK(bm_mse_gradient);

void bm_train_scg(benchmark::State& state) {
  auto& f = fixture();
  AnnConfig config;
  config.seed = 5;
  for (auto _ : state) benchmark::DoNotOptimize(train_scg(f.x, f.y, config));
}
BENCHMARK(bm_train_scg)->Unit(benchmark::kMillisecond);

void bm_cross_validate(benchmark::State& state) {
  auto& f = fixture();
  AnnConfig config;
  config.seed = 5;
  for (auto _ : state)
    benchmark::DoNotOptimize(cross_validate(f.x, f.y, config));
}
BENCHMARK(bm_cross_validate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
