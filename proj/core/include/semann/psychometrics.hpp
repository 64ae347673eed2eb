#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace semann {

/// Cronbach's alpha over a respondents x items matrix (sample variances).
/// Requires >= 2 items, >= 2 respondents, and positive total-score variance.
double cronbach_alpha(const Eigen::MatrixXd& items);

struct AveCr {
  double ave = 0.0;  // (sum of squared loadings) / k
  double cr = 0.0;   // (sum of loadings)^2 / ((sum)^2 + sum(1 - loading^2))
};

/// Convergent-validity summaries from standardized loadings. Loadings with
/// |value| > 1 are accepted but reported through `warnings` by callers that
/// care; this function only validates non-emptiness and finiteness.
AveCr ave_cr(const std::vector<double>& loadings);

struct ConstructReliability {
  std::string construct;
  double alpha = 0.0;
  AveCr convergent;
  std::vector<std::pair<std::string, double>> loadings;  // item -> standardized
};

struct DiscriminantMatrix {
  std::vector<std::string> constructs;
  Eigen::MatrixXd values;   // diagonal = sqrt(AVE); off-diagonal = correlations
  std::vector<bool> pass;   // diagonal exceeds every |off-diagonal| in its row/col
};

/// Fornell-Larcker check: substitute sqrt(AVE) on the diagonal of the latent
/// correlation matrix and flag each construct whose diagonal dominates.
DiscriminantMatrix discriminant_validity(
    const std::vector<std::string>& constructs, const std::vector<double>& aves,
    const Eigen::MatrixXd& correlations);

}  // namespace semann
