#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "semann/dataset.hpp"
#include "semann/model_spec.hpp"

namespace semann {

/// The covariance-structure parameter matrices. Latent variables are ordered
/// exogenous-first; `lambda` columns follow that order. Observed variables
/// (rows of `lambda`) are items, then observed covariates, then the outcome.
///
/// Exogenous latents carry covariance `phi`. Endogenous latents satisfy
///   eta = a * eta + b * xi + disturbance,  Cov(disturbance) = diag(psi),
/// and indicators load as  obs = lambda * (xi; eta) + error, Cov = diag(theta).
struct SemParameters {
  Eigen::MatrixXd lambda;  // p x (m + q)
  Eigen::MatrixXd a;       // q x q, strictly lower triangular in model order
  Eigen::MatrixXd b;       // q x m
  Eigen::MatrixXd phi;     // m x m symmetric
  Eigen::VectorXd psi;     // q, > 0
  Eigen::VectorXd theta;   // p, >= 0 (fixed 0 for single-indicator variables)
};

/// Covariance of the stacked latent vector (xi; eta) implied by the
/// structural equations.
Eigen::MatrixXd latent_covariance(const SemParameters& params);

/// Model-implied covariance of the observed vector:
/// lambda * latent_covariance * lambda' + diag(theta). Always symmetric.
/// Throws NumericError when (I - a) is singular.
Eigen::MatrixXd implied_covariance(const SemParameters& params);

enum class ParamMatrix { Lambda, A, B, Phi, Psi, Theta };

struct FreeParameter {
  ParamMatrix matrix;
  int row = 0;
  int col = 0;
  std::string label;  // lavaan-style: "F=~item", "t~s", "x~~y"
};

enum class SemMode {
  Measurement,  // constructs only, freely correlated (CFA)
  Structural,   // full structural model with covariates and outcome
};

enum class LatentKind { Construct, ObservedCovariate, ObservedOutcome };

struct LatentInfo {
  std::string name;
  LatentKind kind = LatentKind::Construct;
  bool endogenous = false;
  std::vector<int> indicator_rows;  // rows of lambda loading on this latent
};

/// Frozen structure of one estimable model: latent layout, fixed entries,
/// free-parameter table, and the data binding for the observed variables.
/// Identification uses the marker-variable convention: the first loading of
/// every construct is fixed to 1; single-indicator observed variables get a
/// fixed unit loading and zero error variance.
class SemModel {
 public:
  SemModel() = default;  // empty model; fill via build()/saturated()

  static SemModel build(const ModelSpec& spec, SemMode mode);

  /// All observed variables free to covary (one fixed unit-loading latent
  /// per variable, full phi): the saturated model, df = 0.
  static SemModel saturated(const std::vector<std::string>& observed);

  int n_observed() const { return static_cast<int>(observed_names_.size()); }
  int n_exogenous() const { return m_; }
  int n_endogenous() const { return q_; }
  int n_free() const { return static_cast<int>(free_.size()); }
  int degrees_of_freedom() const;

  const std::vector<std::string>& observed_names() const {
    return observed_names_;
  }
  const std::vector<LatentInfo>& latents() const { return latents_; }
  int latent_index(const std::string& name) const;
  const std::vector<FreeParameter>& free_parameters() const { return free_; }
  int free_index(ParamMatrix matrix, int row, int col) const;

  /// Position of the structural coefficient for `target ~ source`;
  /// nullopt when the model has no such path.
  std::optional<FreeParameter> find_path(const std::string& target,
                                         const std::string& source) const;

  SemParameters make_parameters(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd extract_free(const SemParameters& params) const;

  /// Observed data in model column order (items, covariate codes, outcome).
  Eigen::MatrixXd observed_matrix(const Dataset& data) const;

  /// Heuristic starting point: free loadings 0.7 * sd(item), error variances
  /// 0.5 * var(item), paths 0, exogenous covariances from sample covariances
  /// of construct mean scores (ridged to positive definiteness if needed).
  Eigen::VectorXd start_values(const Dataset& data) const;

  /// Maximum-likelihood discrepancy
  ///   F(theta) = ln|Sigma| + tr(S Sigma^-1) - ln|S| - p,
  /// +infinity when Sigma is not positive definite or (I - a) is singular.
  double fml(const Eigen::VectorXd& theta, const Eigen::MatrixXd& s,
             double log_det_s) const;

  /// Analytic gradient of fml (matches finite differences; see tests).
  Eigen::VectorXd fml_gradient(const Eigen::VectorXd& theta,
                               const Eigen::MatrixXd& s) const;

 private:
  void add_free(ParamMatrix matrix, int row, int col, std::string label);
  SemParameters zero_parameters() const;

  int m_ = 0;  // exogenous latents
  int q_ = 0;  // endogenous latents
  std::vector<std::string> observed_names_;
  std::vector<LatentInfo> latents_;  // exogenous first, then endogenous
  std::vector<FreeParameter> free_;
  // fixed unit loadings: (row, latent column) pairs applied before the free
  // entries are written
  std::vector<std::pair<int, int>> fixed_unit_loadings_;
};

}  // namespace semann
