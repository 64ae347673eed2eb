#include "semann/psychometrics.hpp"

#include <cmath>

#include "semann/errors.hpp"

namespace semann {

double cronbach_alpha(const Eigen::MatrixXd& items) {
  const Eigen::Index n = items.rows();
  const Eigen::Index k = items.cols();
  if (k < 2) throw ConfigError("cronbach_alpha: needs at least 2 items");
  if (n < 2) throw DataError("cronbach_alpha: needs at least 2 respondents");

  auto sample_var = [n](const Eigen::VectorXd& v) {
    const double m = v.mean();
    return (v.array() - m).square().sum() / static_cast<double>(n - 1);
  };

  double item_var_sum = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) item_var_sum += sample_var(items.col(j));
  const double total_var = sample_var(items.rowwise().sum());
  if (total_var <= 0.0)
    throw DataError("cronbach_alpha: total-score variance is zero");

  const double kk = static_cast<double>(k);
  return kk / (kk - 1.0) * (1.0 - item_var_sum / total_var);
}

AveCr ave_cr(const std::vector<double>& loadings) {
  if (loadings.empty()) throw ConfigError("ave_cr: empty loading list");
  double sum = 0.0, sum_sq = 0.0, err = 0.0;
  for (double l : loadings) {
    if (!std::isfinite(l)) throw ConfigError("ave_cr: non-finite loading");
    sum += l;
    sum_sq += l * l;
    err += 1.0 - l * l;
  }
  AveCr out;
  out.ave = sum_sq / static_cast<double>(loadings.size());
  out.cr = (sum * sum) / (sum * sum + err);
  return out;
}

DiscriminantMatrix discriminant_validity(
    const std::vector<std::string>& constructs, const std::vector<double>& aves,
    const Eigen::MatrixXd& correlations) {
  const auto k = static_cast<Eigen::Index>(constructs.size());
  if (static_cast<Eigen::Index>(aves.size()) != k ||
      correlations.rows() != k || correlations.cols() != k)
    throw ConfigError("discriminant_validity: dimension mismatch");

  DiscriminantMatrix out;
  out.constructs = constructs;
  out.values = correlations;
  for (Eigen::Index i = 0; i < k; ++i)
    out.values(i, i) = std::sqrt(aves[static_cast<std::size_t>(i)]);

  for (Eigen::Index i = 0; i < k; ++i) {
    bool ok = true;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j == i) continue;
      if (std::fabs(out.values(i, j)) >= out.values(i, i)) ok = false;
    }
    out.pass.push_back(ok);
  }
  return out;
}

}  // namespace semann
