#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "semann/dataset.hpp"
#include "semann/model_spec.hpp"
#include "semann/optim.hpp"
#include "semann/sem_model.hpp"

namespace semann {

struct FitIndices {
  double chi_square = 0.0;
  int df = 0;
  double baseline_chi_square = 0.0;
  int baseline_df = 0;

  double rmsea = 0.0;
  double gfi = 0.0;
  double cfi = 1.0;
  double tli = 1.0;
  bool tli_defined = true;
  double chi_square_per_df = 0.0;
  bool chi_square_per_df_defined = true;

  // acceptance thresholds: RMSEA < 0.08, GFI > 0.90, CFI > 0.90,
  // TLI > 0.90, chi-square/df < 5.00
  bool rmsea_pass = false;
  bool gfi_pass = false;
  bool cfi_pass = false;
  bool tli_pass = false;
  bool chi_square_per_df_pass = false;

  bool all_pass() const {
    return rmsea_pass && gfi_pass && cfi_pass && tli_pass &&
           chi_square_per_df_pass;
  }
};

/// Index set from the fitted and baseline (independence) chi-squares.
/// RMSEA  = sqrt(max(chi2 - df, 0) / (df (N - 1))), 0 when df = 0
/// CFI    = 1 - max(chi2 - df, 0) / max(chi2_b - df_b, chi2 - df, 0)
/// TLI    = ((chi2_b/df_b) - (chi2/df)) / ((chi2_b/df_b) - 1), clamped to <= 1
/// GFI    = 1 - tr[(Sigma^-1 S - I)^2] / tr[(Sigma^-1 S)^2]
FitIndices fit_indices(double chi_square, int df, int n,
                       double baseline_chi_square, int baseline_df,
                       const Eigen::MatrixXd& s,
                       const Eigen::MatrixXd& sigma_hat);

struct ParameterEstimate {
  std::string label;
  ParamMatrix matrix = ParamMatrix::Lambda;
  int row = 0;
  int col = 0;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p = 1.0;
  std::string stars;
  double standardized = 0.0;
};

struct SemFit {
  SemModel model;
  Eigen::VectorXd theta;  // free-parameter vector at the optimum
  SemParameters params;
  std::vector<ParameterEstimate> estimates;
  FitIndices fit;

  std::vector<std::string> latent_names;
  Eigen::MatrixXd latent_correlations;
  Eigen::MatrixXd sample_cov;
  Eigen::MatrixXd implied;

  int n = 0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
  std::string stop_reason;
  std::vector<std::string> warnings;

  const ParameterEstimate* find(const std::string& label) const;
  /// Structural coefficient for `target ~ source`, or nullptr.
  const ParameterEstimate* find_path(const std::string& target,
                                     const std::string& source) const;
  /// Standardized loadings of one construct, in item order.
  std::vector<double> standardized_loadings(const std::string& construct) const;
};

struct FitOptions {
  SemMode mode = SemMode::Structural;
  BfgsOptions optim;
  bool compute_se = true;
  std::optional<Eigen::VectorXd> start;  // warm start (bootstrap replicates)
  double heywood_floor = 1e-6;
};

/// Maximum-likelihood covariance-structure fit. Throws DataError when the
/// sample covariance is not positive definite and ConvergenceError when the
/// optimizer hits the iteration cap. Negative error variances (Heywood
/// cases) are floored at `heywood_floor` with a warning.
SemFit fit_ml(const ModelSpec& spec, const Dataset& data,
              const FitOptions& options = {});

/// Same, for an explicitly constructed model (e.g. SemModel::saturated).
SemFit fit_ml_model(const SemModel& model, const Dataset& data,
                    const FitOptions& options = {});

struct HypothesisResult {
  std::string id;
  std::string source;
  std::string target;
  int expected_sign = +1;
  double estimate = 0.0;  // standardized
  double p = 1.0;
  std::string stars;
  bool supported = false;  // p < 0.05 and sign matches expectation
};

/// Evaluate directional hypotheses against fitted structural paths.
/// Throws ConfigError when a hypothesis names a path the model lacks.
std::vector<HypothesisResult> test_hypotheses(
    const SemFit& fit, const std::vector<Hypothesis>& hypotheses);

}  // namespace semann
