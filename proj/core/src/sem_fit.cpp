#include "semann/sem_fit.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "semann/errors.hpp"
#include "semann/special_functions.hpp"
#include "semann/stats.hpp"

namespace semann {

FitIndices fit_indices(double chi_square, int df, int n,
                       double baseline_chi_square, int baseline_df,
                       const Eigen::MatrixXd& s,
                       const Eigen::MatrixXd& sigma_hat) {
  FitIndices out;
  out.chi_square = chi_square;
  out.df = df;
  out.baseline_chi_square = baseline_chi_square;
  out.baseline_df = baseline_df;

  out.rmsea = df > 0 ? std::sqrt(std::max(chi_square - df, 0.0) /
                                 (static_cast<double>(df) * (n - 1)))
                     : 0.0;

  const double excess = std::max(chi_square - df, 0.0);
  const double denom =
      std::max({baseline_chi_square - baseline_df, chi_square - df, 0.0});
  out.cfi = denom > 0.0 ? 1.0 - excess / denom : 1.0;

  if (df > 0 && baseline_df > 0) {
    const double base_ratio = baseline_chi_square / baseline_df;
    if (base_ratio > 1.0) {
      out.tli = (base_ratio - chi_square / df) / (base_ratio - 1.0);
      out.tli = std::min(out.tli, 1.0);
    } else {
      out.tli_defined = false;
    }
  } else {
    out.tli_defined = false;
  }

  {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma_hat);
    if (llt.info() != Eigen::Success)
      throw NumericError("fit_indices: implied covariance not positive definite");
    const Eigen::MatrixXd ratio = llt.solve(s);  // Sigma^-1 S
    const Eigen::MatrixXd dev =
        ratio - Eigen::MatrixXd::Identity(ratio.rows(), ratio.cols());
    out.gfi = 1.0 - (dev * dev).trace() / (ratio * ratio).trace();
  }

  if (df > 0) {
    out.chi_square_per_df = chi_square / df;
  } else {
    out.chi_square_per_df_defined = false;
  }

  // a value sitting exactly on the recommended threshold counts as meeting
  // it (rounded report values land on the boundary)
  out.rmsea_pass = out.rmsea <= 0.08;
  out.gfi_pass = out.gfi >= 0.90;
  out.cfi_pass = out.cfi >= 0.90;
  out.tli_pass = !out.tli_defined || out.tli >= 0.90;
  out.chi_square_per_df_pass =
      !out.chi_square_per_df_defined || out.chi_square_per_df <= 5.00;
  return out;
}

const ParameterEstimate* SemFit::find(const std::string& label) const {
  for (const auto& e : estimates)
    if (e.label == label) return &e;
  return nullptr;
}

const ParameterEstimate* SemFit::find_path(const std::string& target,
                                           const std::string& source) const {
  const ParameterEstimate* e = find(target + "~" + source);
  if (e && (e->matrix == ParamMatrix::A || e->matrix == ParamMatrix::B))
    return e;
  return nullptr;
}

std::vector<double> SemFit::standardized_loadings(
    const std::string& construct) const {
  const int l = model.latent_index(construct);
  if (l < 0) throw ConfigError("unknown construct '" + construct + "'");
  const auto& info = model.latents()[static_cast<std::size_t>(l)];
  const Eigen::MatrixXd c = latent_covariance(params);
  std::vector<double> out;
  for (int row : info.indicator_rows) {
    const double sd_lat = std::sqrt(c(l, l));
    const double sd_obs = std::sqrt(implied(row, row));
    out.push_back(params.lambda(row, l) * sd_lat / sd_obs);
  }
  return out;
}

namespace {

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  return centered.transpose() * centered / static_cast<double>(n - 1);
}

// Central-difference Hessian of fml built from the analytic gradient.
Eigen::MatrixXd numeric_hessian(const SemModel& model,
                                const Eigen::VectorXd& theta,
                                const Eigen::MatrixXd& s) {
  const auto k = theta.size();
  Eigen::MatrixXd hess(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double h = 1e-5 * std::max(1.0, std::fabs(theta(i)));
    Eigen::VectorXd tp = theta, tm = theta;
    tp(i) += h;
    tm(i) -= h;
    hess.col(i) =
        (model.fml_gradient(tp, s) - model.fml_gradient(tm, s)) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

// Inverse that survives a slightly indefinite Hessian: eigenvalues below a
// relative floor are clamped before inversion; sets flag when it intervened.
Eigen::MatrixXd robust_inverse(const Eigen::MatrixXd& m, bool& adjusted) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double floor = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  Eigen::VectorXd inv_ev(ev.size());
  adjusted = false;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    double v = ev(i);
    if (v < floor) {
      v = floor;
      adjusted = true;
    }
    inv_ev(i) = 1.0 / v;
  }
  return es.eigenvectors() * inv_ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

SemFit fit_ml_model(const SemModel& model, const Dataset& data,
                    const FitOptions& options) {
  const Eigen::MatrixXd x = model.observed_matrix(data);
  const int n = static_cast<int>(x.rows());
  const int p = model.n_observed();
  if (n < p + 1)
    throw DataError("fit_ml: fewer rows than observed variables + 1");

  const Eigen::MatrixXd s = sample_covariance(x);
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    const double largest = es.eigenvalues().maxCoeff();
    if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, largest))
      throw DataError(
          "sample covariance is not positive definite; check for collinear "
          "or constant columns");
  }
  Eigen::LLT<Eigen::MatrixXd> s_llt(s);
  const double log_det_s =
      2.0 * s_llt.matrixLLT().diagonal().array().log().sum();

  Eigen::VectorXd theta0 =
      options.start ? *options.start : model.start_values(data);
  if (theta0.size() != model.n_free())
    throw ConfigError("fit_ml: warm-start length mismatch");
  // a warm start from another sample can be infeasible here; fall back
  if (!std::isfinite(model.fml(theta0, s, log_det_s)))
    theta0 = model.start_values(data);

  auto objective = [&](const Eigen::VectorXd& t) {
    return model.fml(t, s, log_det_s);
  };
  auto gradient = [&](const Eigen::VectorXd& t) {
    return model.fml_gradient(t, s);
  };
  BfgsResult opt = minimize_bfgs(objective, gradient, theta0, options.optim);
  if (!opt.converged)
    throw ConvergenceError("fit_ml did not converge", opt.iterations, opt.f,
                           opt.gradient.lpNorm<Eigen::Infinity>());

  SemFit fit;
  fit.model = model;
  fit.n = n;
  fit.sample_cov = s;
  fit.iterations = opt.iterations;
  fit.converged = opt.converged;
  fit.stop_reason = opt.stop_reason;

  // Heywood handling: floor negative variance estimates, keep a warning.
  fit.theta = opt.x;
  for (int i = 0; i < model.n_free(); ++i) {
    const auto& f = model.free_parameters()[static_cast<std::size_t>(i)];
    const bool is_variance = f.matrix == ParamMatrix::Theta ||
                             f.matrix == ParamMatrix::Psi ||
                             (f.matrix == ParamMatrix::Phi && f.row == f.col);
    if (is_variance && fit.theta(i) < options.heywood_floor) {
      fit.warnings.push_back("Heywood case: variance " + f.label +
                             " floored at " +
                             std::to_string(options.heywood_floor));
      fit.theta(i) = options.heywood_floor;
    }
  }

  fit.params = model.make_parameters(fit.theta);
  fit.implied = implied_covariance(fit.params);
  const double f_min =
      std::max(model.fml(fit.theta, s, log_det_s), 0.0);
  fit.gradient_norm =
      model.fml_gradient(fit.theta, s).lpNorm<Eigen::Infinity>();

  // Baseline (independence) model: diagonal Sigma, solved in closed form by
  // Sigma_ii = S_ii, so F_baseline = sum(log S_ii) - log|S|.
  const double f_baseline =
      s.diagonal().array().log().sum() - log_det_s;
  const int df_baseline = p * (p + 1) / 2 - p;

  const double chi_square = (n - 1) * f_min;
  fit.fit = fit_indices(chi_square, model.degrees_of_freedom(), n,
                        (n - 1) * std::max(f_baseline, 0.0), df_baseline, s,
                        fit.implied);

  // Standardization factors from the fitted model.
  const Eigen::MatrixXd c = latent_covariance(fit.params);
  Eigen::VectorXd sd_lat = c.diagonal().array().sqrt();
  Eigen::VectorXd sd_obs = fit.implied.diagonal().array().sqrt();

  fit.latent_names.clear();
  for (const auto& info : model.latents()) fit.latent_names.push_back(info.name);
  fit.latent_correlations =
      sd_lat.cwiseInverse().asDiagonal() * c * sd_lat.cwiseInverse().asDiagonal();

  // Standard errors from the numerically evaluated Hessian of (n-1)/2 * F.
  Eigen::VectorXd se = Eigen::VectorXd::Zero(model.n_free());
  if (options.compute_se) {
    const Eigen::MatrixXd hess = numeric_hessian(model, fit.theta, s);
    bool adjusted = false;
    const Eigen::MatrixXd cov =
        robust_inverse(0.5 * (n - 1) * hess, adjusted);
    if (adjusted)
      fit.warnings.push_back(
          "information matrix not positive definite; standard errors of some "
          "parameters are unreliable");
    se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  }

  const int m = model.n_exogenous();
  for (int i = 0; i < model.n_free(); ++i) {
    const auto& f = model.free_parameters()[static_cast<std::size_t>(i)];
    ParameterEstimate e;
    e.label = f.label;
    e.matrix = f.matrix;
    e.row = f.row;
    e.col = f.col;
    e.estimate = fit.theta(i);
    e.se = se(i);
    e.z = e.se > 0.0 ? e.estimate / e.se : 0.0;
    e.p = options.compute_se && e.se > 0.0
              ? special::normal_two_sided_p(e.z)
              : 1.0;
    e.stars = significance_stars(e.p);
    switch (f.matrix) {
      case ParamMatrix::Lambda:
        e.standardized = e.estimate * sd_lat(f.col) / sd_obs(f.row);
        break;
      case ParamMatrix::A:
        e.standardized = e.estimate * sd_lat(m + f.col) / sd_lat(m + f.row);
        break;
      case ParamMatrix::B:
        e.standardized = e.estimate * sd_lat(f.col) / sd_lat(m + f.row);
        break;
      case ParamMatrix::Phi:
        e.standardized = f.row == f.col
                             ? 1.0
                             : e.estimate / (sd_lat(f.row) * sd_lat(f.col));
        break;
      case ParamMatrix::Psi:
        e.standardized = e.estimate / c(m + f.row, m + f.row);
        break;
      case ParamMatrix::Theta:
        e.standardized = e.estimate / fit.implied(f.row, f.row);
        break;
    }
    fit.estimates.push_back(std::move(e));
  }
  return fit;
}

SemFit fit_ml(const ModelSpec& spec, const Dataset& data,
              const FitOptions& options) {
  return fit_ml_model(SemModel::build(spec, options.mode), data, options);
}

std::vector<HypothesisResult> test_hypotheses(
    const SemFit& fit, const std::vector<Hypothesis>& hypotheses) {
  std::vector<HypothesisResult> out;
  for (const auto& h : hypotheses) {
    const ParameterEstimate* e = fit.find_path(h.target, h.source);
    if (!e)
      throw ConfigError("hypothesis " + h.id + " names unknown path " +
                        h.target + "~" + h.source);
    HypothesisResult r;
    r.id = h.id;
    r.source = h.source;
    r.target = h.target;
    r.expected_sign = h.expected_sign;
    r.estimate = e->standardized;
    r.p = e->p;
    r.stars = e->stars;
    const int sign = e->standardized > 0.0 ? +1 : (e->standardized < 0.0 ? -1 : 0);
    r.supported = e->p < 0.05 && sign == h.expected_sign;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace semann
