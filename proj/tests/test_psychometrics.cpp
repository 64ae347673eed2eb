#include <doctest.h>

#include <cmath>

#include "semann/errors.hpp"
#include "semann/psychometrics.hpp"
#include "semann/rng.hpp"

using namespace semann;

namespace {

// bivariate rows with unit variances and the requested correlation
Eigen::MatrixXd correlated_pair(double rho, int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, 2);
  for (int i = 0; i < n; ++i) {
    const double a = rng.normal();
    const double b = rho * a + std::sqrt(1 - rho * rho) * rng.normal();
    x(i, 0) = a;
    x(i, 1) = b;
  }
  return x;
}

}  // namespace

TEST_CASE("alpha is 1 for identical copies of a non-constant item") {
  Eigen::MatrixXd items(4, 3);
  items.col(0) << 1, 2, 4, 5;
  items.col(1) = items.col(0);
  items.col(2) = items.col(0);
  CHECK(cronbach_alpha(items) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("alpha formula on a known covariance structure") {
  // two items, unit variances, covariance 0.5 -> alpha = 2/3
  // exact construction: x2 = 0.5 x1 + sqrt(0.75) z with var(x1) = var(z) = 1
  const int n = 200000;
  const Eigen::MatrixXd items = correlated_pair(0.5, n, 42);
  CHECK(cronbach_alpha(items) == doctest::Approx(2.0 / 3.0).epsilon(0.01));
}

TEST_CASE("uncorrelated unit-variance items give alpha near zero") {
  const Eigen::MatrixXd items = correlated_pair(0.0, 200000, 7);
  CHECK(cronbach_alpha(items) == doctest::Approx(0.0).epsilon(0.02));
}

TEST_CASE("alpha error paths") {
  Eigen::MatrixXd one_item(3, 1);
  one_item << 1, 2, 3;
  CHECK_THROWS_AS(cronbach_alpha(one_item), ConfigError);
  Eigen::MatrixXd opposite(4, 2);  // total score constant -> zero variance
  opposite.col(0) << 1, 2, 3, 4;
  opposite.col(1) << 4, 3, 2, 1;
  CHECK_THROWS_AS(cronbach_alpha(opposite), DataError);
}

TEST_CASE("alpha invariances: shift and uniform positive rescale") {
  Rng rng(3);
  Eigen::MatrixXd items(50, 4);
  for (Eigen::Index i = 0; i < items.rows(); ++i) {
    const double common = rng.normal();
    for (Eigen::Index j = 0; j < 4; ++j)
      items(i, j) = common + 0.8 * rng.normal();
  }
  const double base = cronbach_alpha(items);
  Eigen::MatrixXd shifted = items.array() + 13.0;
  CHECK(cronbach_alpha(shifted) == doctest::Approx(base).epsilon(1e-9));
  Eigen::MatrixXd scaled = items * 2.5;
  CHECK(cronbach_alpha(scaled) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("ave and cr reproduce the reference construct") {
  // loadings {0.76, 0.70, 0.83} print as AVE 0.59, CR 0.81
  const AveCr r = ave_cr({0.76, 0.70, 0.83});
  CHECK(r.ave == doctest::Approx(0.59).epsilon(0.0085));
  CHECK(r.cr == doctest::Approx(0.81).epsilon(0.0062));
  // exact values
  CHECK(r.ave == doctest::Approx(1.7565 / 3.0).epsilon(1e-12));
  const double s = 0.76 + 0.70 + 0.83;
  CHECK(r.cr == doctest::Approx(s * s / (s * s + 3.0 - 1.7565)).epsilon(1e-12));
}

TEST_CASE("perfect indicators give ave = cr = 1") {
  const AveCr r = ave_cr({1.0, 1.0, 1.0, 1.0});
  CHECK(r.ave == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.cr == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hand-computed two-loading case") {
  const AveCr r = ave_cr({0.5, 0.5});
  CHECK(r.ave == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(r.cr == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("empty loading list is an error") {
  CHECK_THROWS_AS(ave_cr({}), ConfigError);
}

TEST_CASE("cr is monotone nondecreasing in each loading magnitude") {
  std::vector<double> base = {0.4, 0.6, 0.7};
  double prev = ave_cr(base).cr;
  for (double bump = 0.45; bump <= 1.0; bump += 0.05) {
    auto next = base;
    next[0] = bump;
    const double cr = ave_cr(next).cr;
    CHECK(cr >= prev - 1e-12);
    prev = cr;
  }
}

TEST_CASE("discriminant validity substitutes sqrt(ave) on the diagonal") {
  Eigen::MatrixXd corr(2, 2);
  corr << 1.0, 0.44, 0.44, 1.0;
  const DiscriminantMatrix m =
      discriminant_validity({"TST", "UT"}, {0.59, 0.61}, corr);
  CHECK(m.values(0, 0) == doctest::Approx(std::sqrt(0.59)).epsilon(1e-12));
  CHECK(m.values(0, 0) == doctest::Approx(0.77).epsilon(0.005));
  CHECK(m.values(1, 0) == doctest::Approx(0.44));
  CHECK(m.pass[0]);
  CHECK(m.pass[1]);
}

TEST_CASE("single construct passes vacuously") {
  Eigen::MatrixXd corr(1, 1);
  corr << 1.0;
  const DiscriminantMatrix m = discriminant_validity({"A"}, {0.5}, corr);
  CHECK(m.pass == std::vector<bool>{true});
}

TEST_CASE("a correlation above sqrt(ave) fails the construct") {
  Eigen::MatrixXd corr(2, 2);
  corr << 1.0, 0.6, 0.6, 1.0;
  const DiscriminantMatrix m =
      discriminant_validity({"A", "B"}, {0.25, 0.81}, corr);
  CHECK_FALSE(m.pass[0]);  // sqrt(0.25) = 0.5 < 0.6
  CHECK(m.pass[1]);
}

TEST_CASE("dimension mismatch is an error") {
  Eigen::MatrixXd corr(2, 2);
  corr.setIdentity();
  CHECK_THROWS_AS(discriminant_validity({"A"}, {0.5, 0.4}, corr), ConfigError);
}
