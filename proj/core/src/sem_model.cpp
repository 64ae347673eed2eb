#include "semann/sem_model.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "semann/errors.hpp"

namespace semann {

Eigen::MatrixXd latent_covariance(const SemParameters& params) {
  const auto m = params.phi.rows();
  const auto q = params.a.rows();
  Eigen::MatrixXd c(m + q, m + q);
  c.topLeftCorner(m, m) = params.phi;
  if (q > 0) {
    const Eigen::MatrixXd i_minus_a =
        Eigen::MatrixXd::Identity(q, q) - params.a;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(i_minus_a);
    if (!lu.isInvertible())
      throw NumericError("structural matrix (I - A) is singular");
    const Eigen::MatrixXd e = lu.inverse();
    const Eigen::MatrixXd c_eta_xi = e * params.b * params.phi;  // q x m
    Eigen::MatrixXd w = params.b * params.phi * params.b.transpose();
    w.diagonal() += params.psi;
    c.bottomLeftCorner(q, m) = c_eta_xi;
    c.topRightCorner(m, q) = c_eta_xi.transpose();
    c.bottomRightCorner(q, q) = e * w * e.transpose();
  }
  return 0.5 * (c + c.transpose());
}

Eigen::MatrixXd implied_covariance(const SemParameters& params) {
  const Eigen::MatrixXd c = latent_covariance(params);
  Eigen::MatrixXd sigma =
      params.lambda * c * params.lambda.transpose();
  sigma.diagonal() += params.theta;
  return 0.5 * (sigma + sigma.transpose());
}

namespace {

Eigen::VectorXd column_by_name(const Dataset& data, const std::string& name) {
  const int j = data.item_index(name);
  if (j >= 0) return data.items.col(j);
  if (data.demographic_index(name) >= 0) return data.demographic_values(name);
  if (name == data.outcome_name && data.outcome.size() > 0)
    return data.outcome;
  throw ConfigError("dataset has no column for model variable '" + name + "'");
}

double sample_var(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double m = v.mean();
  return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

double sample_cov(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ma = a.mean(), mb = b.mean();
  return ((a.array() - ma) * (b.array() - mb)).sum() /
         static_cast<double>(a.size() - 1);
}

// Stable topological order of regression targets: repeatedly emit the first
// declared target whose endogenous predictors are all already emitted.
std::vector<std::string> topological_targets(
    const std::vector<std::string>& targets,
    const std::vector<Regression>& regressions) {
  std::set<std::string> target_set(targets.begin(), targets.end());
  std::vector<std::string> order;
  std::set<std::string> placed;
  while (order.size() < targets.size()) {
    bool progressed = false;
    for (const auto& t : targets) {
      if (placed.count(t)) continue;
      bool ready = true;
      for (const auto& r : regressions) {
        if (r.target != t) continue;
        for (const auto& p : r.predictors)
          if (target_set.count(p) && !placed.count(p)) ready = false;
      }
      if (ready) {
        order.push_back(t);
        placed.insert(t);
        progressed = true;
      }
    }
    if (!progressed)
      throw ValidationError("cyclic structural regressions");  // unreachable
  }
  return order;
}

}  // namespace

void SemModel::add_free(ParamMatrix matrix, int row, int col,
                        std::string label) {
  free_.push_back({matrix, row, col, std::move(label)});
}

SemModel SemModel::build(const ModelSpec& spec, SemMode mode) {
  SemModel model;

  // Which constructs are endogenous, and which covariates take part.
  std::vector<std::string> target_order;
  std::vector<std::string> used_controls;
  bool outcome_used = false;
  if (mode == SemMode::Structural) {
    std::set<std::string> seen_targets;
    for (const auto& r : spec.structural)
      if (seen_targets.insert(r.target).second) target_order.push_back(r.target);
    target_order = topological_targets(target_order, spec.structural);

    std::set<std::string> referenced;
    for (const auto& r : spec.structural) {
      referenced.insert(r.target);
      referenced.insert(r.predictors.begin(), r.predictors.end());
    }
    for (const auto& c : spec.controls)
      if (referenced.count(c.name)) used_controls.push_back(c.name);
    outcome_used = !spec.outcome.empty() && referenced.count(spec.outcome);
  }
  const std::set<std::string> endo_set(target_order.begin(),
                                       target_order.end());

  // Latent layout: exogenous constructs (declaration order), covariates,
  // then endogenous in topological order.
  for (const auto& c : spec.measurement)
    if (!endo_set.count(c.name))
      model.latents_.push_back({c.name, LatentKind::Construct, false, {}});
  for (const auto& name : used_controls)
    model.latents_.push_back({name, LatentKind::ObservedCovariate, false, {}});
  if (outcome_used && !endo_set.count(spec.outcome))
    model.latents_.push_back(
        {spec.outcome, LatentKind::ObservedOutcome, false, {}});
  model.m_ = static_cast<int>(model.latents_.size());
  for (const auto& t : target_order) {
    const LatentKind kind = spec.has_construct(t) ? LatentKind::Construct
                                                  : LatentKind::ObservedOutcome;
    model.latents_.push_back({t, kind, true, {}});
  }
  model.q_ = static_cast<int>(target_order.size());

  // Observed rows: items in declaration order, then covariates, then outcome.
  auto observed_row = [&](const std::string& name) {
    model.observed_names_.push_back(name);
    return static_cast<int>(model.observed_names_.size()) - 1;
  };
  for (const auto& c : spec.measurement) {
    const int latent = model.latent_index(c.name);
    if (latent < 0) continue;  // measurement-only view never skips
    auto& info = model.latents_[static_cast<std::size_t>(latent)];
    for (std::size_t k = 0; k < c.items.size(); ++k) {
      const int row = observed_row(c.items[k]);
      info.indicator_rows.push_back(row);
      if (k == 0)
        model.fixed_unit_loadings_.push_back({row, latent});
      else
        model.add_free(ParamMatrix::Lambda, row, latent,
                       c.name + "=~" + c.items[k]);
    }
  }
  for (auto& info : model.latents_) {
    if (info.kind == LatentKind::Construct) continue;
    const int row = observed_row(info.name);
    info.indicator_rows.push_back(row);
    model.fixed_unit_loadings_.push_back(
        {row, model.latent_index(info.name)});
  }

  // Structural paths in declaration order (none in measurement mode).
  const std::vector<Regression> no_regressions;
  const auto& regressions =
      mode == SemMode::Structural ? spec.structural : no_regressions;
  std::set<std::string> path_labels;
  for (const auto& r : regressions) {
    const int t = model.latent_index(r.target);
    const int t_endo = t - model.m_;
    for (const auto& pname : r.predictors) {
      const int s = model.latent_index(pname);
      if (s < 0)
        throw ValidationError("structural predictor '" + pname +
                              "' is not part of the model");
      const std::string label = r.target + "~" + pname;
      if (!path_labels.insert(label).second)
        throw ValidationError("duplicate structural path " + label);
      if (s < model.m_)
        model.add_free(ParamMatrix::B, t_endo, s, label);
      else
        model.add_free(ParamMatrix::A, t_endo, s - model.m_, label);
    }
  }

  // Free covariances among exogenous latents (lower triangle incl. diagonal).
  for (int i = 0; i < model.m_; ++i)
    for (int j = 0; j <= i; ++j)
      model.add_free(ParamMatrix::Phi, i, j,
                     model.latents_[static_cast<std::size_t>(j)].name + "~~" +
                         model.latents_[static_cast<std::size_t>(i)].name);

  // Disturbance variances.
  for (int e = 0; e < model.q_; ++e) {
    const auto& name = model.latents_[static_cast<std::size_t>(model.m_ + e)].name;
    model.add_free(ParamMatrix::Psi, e, e, name + "~~" + name);
  }

  // Indicator error variances; single-indicator observed variables keep the
  // fixed zero set by zero_parameters().
  for (const auto& info : model.latents_) {
    if (info.kind != LatentKind::Construct) continue;
    for (int row : info.indicator_rows) {
      const auto& name = model.observed_names_[static_cast<std::size_t>(row)];
      model.add_free(ParamMatrix::Theta, row, row, name + "~~" + name);
    }
  }

  if (model.degrees_of_freedom() < 0)
    throw ValidationError(
        "model is not identified: more free parameters than covariance "
        "moments (df < 0)");
  return model;
}

SemModel SemModel::saturated(const std::vector<std::string>& observed) {
  SemModel model;
  model.m_ = static_cast<int>(observed.size());
  model.q_ = 0;
  for (int i = 0; i < model.m_; ++i) {
    model.observed_names_.push_back(observed[static_cast<std::size_t>(i)]);
    model.latents_.push_back({observed[static_cast<std::size_t>(i)],
                              LatentKind::ObservedCovariate, false, {i}});
    model.fixed_unit_loadings_.push_back({i, i});
  }
  for (int i = 0; i < model.m_; ++i)
    for (int j = 0; j <= i; ++j)
      model.add_free(ParamMatrix::Phi, i, j,
                     observed[static_cast<std::size_t>(j)] + "~~" +
                         observed[static_cast<std::size_t>(i)]);
  return model;
}

int SemModel::degrees_of_freedom() const {
  const int p = n_observed();
  return p * (p + 1) / 2 - n_free();
}

int SemModel::latent_index(const std::string& name) const {
  for (std::size_t i = 0; i < latents_.size(); ++i)
    if (latents_[i].name == name) return static_cast<int>(i);
  return -1;
}

int SemModel::free_index(ParamMatrix matrix, int row, int col) const {
  for (std::size_t i = 0; i < free_.size(); ++i) {
    const auto& f = free_[i];
    if (f.matrix == matrix && f.row == row && f.col == col)
      return static_cast<int>(i);
  }
  return -1;
}

std::optional<FreeParameter> SemModel::find_path(const std::string& target,
                                                 const std::string& source) const {
  const std::string label = target + "~" + source;
  for (const auto& f : free_)
    if ((f.matrix == ParamMatrix::A || f.matrix == ParamMatrix::B) &&
        f.label == label)
      return f;
  return std::nullopt;
}

SemParameters SemModel::zero_parameters() const {
  SemParameters p;
  const int nobs = n_observed();
  p.lambda = Eigen::MatrixXd::Zero(nobs, m_ + q_);
  p.a = Eigen::MatrixXd::Zero(q_, q_);
  p.b = Eigen::MatrixXd::Zero(q_, m_);
  p.phi = Eigen::MatrixXd::Zero(m_, m_);
  p.psi = Eigen::VectorXd::Zero(q_);
  p.theta = Eigen::VectorXd::Zero(nobs);
  for (const auto& [row, col] : fixed_unit_loadings_) p.lambda(row, col) = 1.0;
  return p;
}

SemParameters SemModel::make_parameters(const Eigen::VectorXd& theta) const {
  if (theta.size() != n_free())
    throw ConfigError("parameter vector length mismatch");
  SemParameters p = zero_parameters();
  for (int i = 0; i < n_free(); ++i) {
    const auto& f = free_[static_cast<std::size_t>(i)];
    const double v = theta(i);
    switch (f.matrix) {
      case ParamMatrix::Lambda: p.lambda(f.row, f.col) = v; break;
      case ParamMatrix::A: p.a(f.row, f.col) = v; break;
      case ParamMatrix::B: p.b(f.row, f.col) = v; break;
      case ParamMatrix::Phi:
        p.phi(f.row, f.col) = v;
        p.phi(f.col, f.row) = v;
        break;
      case ParamMatrix::Psi: p.psi(f.row) = v; break;
      case ParamMatrix::Theta: p.theta(f.row) = v; break;
    }
  }
  return p;
}

Eigen::VectorXd SemModel::extract_free(const SemParameters& p) const {
  Eigen::VectorXd theta(n_free());
  for (int i = 0; i < n_free(); ++i) {
    const auto& f = free_[static_cast<std::size_t>(i)];
    switch (f.matrix) {
      case ParamMatrix::Lambda: theta(i) = p.lambda(f.row, f.col); break;
      case ParamMatrix::A: theta(i) = p.a(f.row, f.col); break;
      case ParamMatrix::B: theta(i) = p.b(f.row, f.col); break;
      case ParamMatrix::Phi: theta(i) = p.phi(f.row, f.col); break;
      case ParamMatrix::Psi: theta(i) = p.psi(f.row); break;
      case ParamMatrix::Theta: theta(i) = p.theta(f.row); break;
    }
  }
  return theta;
}

Eigen::MatrixXd SemModel::observed_matrix(const Dataset& data) const {
  Eigen::MatrixXd x(data.n_rows(), n_observed());
  for (int j = 0; j < n_observed(); ++j)
    x.col(j) = column_by_name(data, observed_names_[static_cast<std::size_t>(j)]);
  return x;
}

Eigen::VectorXd SemModel::start_values(const Dataset& data) const {
  const Eigen::MatrixXd x = observed_matrix(data);
  const int p = n_observed();

  std::vector<double> var(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j)
    var[static_cast<std::size_t>(j)] = sample_var(x.col(j));

  // per-latent proxy score: mean of indicator columns
  Eigen::MatrixXd scores(x.rows(), latents_.size());
  for (std::size_t l = 0; l < latents_.size(); ++l) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(x.rows());
    for (int row : latents_[l].indicator_rows) s += x.col(row);
    scores.col(static_cast<Eigen::Index>(l)) =
        s / static_cast<double>(latents_[l].indicator_rows.size());
  }

  Eigen::MatrixXd phi0 = Eigen::MatrixXd::Zero(m_, m_);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j <= i; ++j) {
      const double c = sample_cov(scores.col(i), scores.col(j));
      phi0(i, j) = c;
      phi0(j, i) = c;
    }
  // ridge until positive definite
  for (int attempt = 0; attempt < 32 && m_ > 0; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(phi0);
    if (llt.info() == Eigen::Success) break;
    phi0.diagonal().array() += 0.05 * (phi0.diagonal().mean() + 1e-3) + 1e-6;
  }

  Eigen::VectorXd theta0(n_free());
  for (int i = 0; i < n_free(); ++i) {
    const auto& f = free_[static_cast<std::size_t>(i)];
    switch (f.matrix) {
      case ParamMatrix::Lambda:
        theta0(i) = 0.7 * std::sqrt(var[static_cast<std::size_t>(f.row)]);
        break;
      case ParamMatrix::A:
      case ParamMatrix::B:
        theta0(i) = 0.0;
        break;
      case ParamMatrix::Phi:
        theta0(i) = phi0(f.row, f.col);
        break;
      case ParamMatrix::Psi:
        theta0(i) =
            0.5 * std::max(sample_var(scores.col(m_ + f.row)), 1e-3);
        break;
      case ParamMatrix::Theta:
        theta0(i) = 0.5 * std::max(var[static_cast<std::size_t>(f.row)], 1e-3);
        break;
    }
  }
  return theta0;
}

double SemModel::fml(const Eigen::VectorXd& theta, const Eigen::MatrixXd& s,
                     double log_det_s) const {
  const SemParameters params = make_parameters(theta);
  Eigen::MatrixXd sigma;
  try {
    sigma = implied_covariance(params);
  } catch (const NumericError&) {
    return std::numeric_limits<double>::infinity();
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    return std::numeric_limits<double>::infinity();
  const double log_det =
      2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double trace = llt.solve(s).trace();
  const double f =
      log_det + trace - log_det_s - static_cast<double>(n_observed());
  return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
}

Eigen::VectorXd SemModel::fml_gradient(const Eigen::VectorXd& theta,
                                       const Eigen::MatrixXd& s) const {
  const SemParameters params = make_parameters(theta);
  const Eigen::MatrixXd c = latent_covariance(params);
  Eigen::MatrixXd sigma = params.lambda * c * params.lambda.transpose();
  sigma.diagonal() += params.theta;
  sigma = 0.5 * (sigma + sigma.transpose()).eval();

  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw NumericError("gradient requested at an infeasible point");
  const int p = n_observed();
  const Eigen::MatrixXd sigma_inv =
      llt.solve(Eigen::MatrixXd::Identity(p, p));
  // dF/dSigma with F = ln|Sigma| + tr(S Sigma^-1) - const
  const Eigen::MatrixXd g = sigma_inv - sigma_inv * s * sigma_inv;

  const Eigen::MatrixXd glc = g * params.lambda * c;            // p x k
  const Eigen::MatrixXd h =
      params.lambda.transpose() * g * params.lambda;            // k x k

  Eigen::MatrixXd m_phi, m_psi, grad_b, grad_a;
  if (q_ > 0) {
    const Eigen::MatrixXd e =
        (Eigen::MatrixXd::Identity(q_, q_) - params.a).inverse();
    const Eigen::MatrixXd eb = e * params.b;  // q x m
    const Eigen::MatrixXd z_xi =
        params.lambda.leftCols(m_) + params.lambda.rightCols(q_) * eb;
    const Eigen::MatrixXd z_v = params.lambda.rightCols(q_) * e;
    m_phi = z_xi.transpose() * g * z_xi;
    m_psi = z_v.transpose() * g * z_v;
    const Eigen::MatrixXd h_ex = h.block(m_, 0, q_, m_);   // eta-xi block
    const Eigen::MatrixXd h_ee = h.block(m_, m_, q_, q_);  // eta-eta block
    grad_b = 2.0 * e.transpose() * (h_ex + h_ee * eb) * params.phi;
    grad_a = 2.0 * e.transpose() *
             (h_ex * c.block(0, m_, m_, q_) + h_ee * c.block(m_, m_, q_, q_));
  } else {
    m_phi = h;
  }

  Eigen::VectorXd grad(n_free());
  for (int i = 0; i < n_free(); ++i) {
    const auto& f = free_[static_cast<std::size_t>(i)];
    switch (f.matrix) {
      case ParamMatrix::Lambda: grad(i) = 2.0 * glc(f.row, f.col); break;
      case ParamMatrix::A: grad(i) = grad_a(f.row, f.col); break;
      case ParamMatrix::B: grad(i) = grad_b(f.row, f.col); break;
      case ParamMatrix::Phi:
        grad(i) = (f.row == f.col) ? m_phi(f.row, f.row)
                                   : 2.0 * m_phi(f.row, f.col);
        break;
      case ParamMatrix::Psi: grad(i) = m_psi(f.row, f.row); break;
      case ParamMatrix::Theta: grad(i) = g(f.row, f.row); break;
    }
  }
  return grad;
}

}  // namespace semann
