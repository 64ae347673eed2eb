#include "semann/synth.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>

#include <nlohmann/json.hpp>

#include "semann/errors.hpp"
#include "semann/rng.hpp"
#include "semann/special_functions.hpp"

namespace semann {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kRowStream = 0x726f77;   // "row"
constexpr std::uint64_t kFillStream = 0x66696c;  // "fil" (unmodeled columns)

int cut_level(double z, const std::vector<double>& cuts) {
  int level = 0;
  for (double c : cuts) {
    if (z > c)
      ++level;
    else
      break;
  }
  return level;
}

std::vector<double> level_quantile_cuts(std::size_t n_levels) {
  std::vector<double> cuts;
  for (std::size_t k = 1; k < n_levels; ++k)
    cuts.push_back(special::normal_quantile(static_cast<double>(k) /
                                            static_cast<double>(n_levels)));
  return cuts;
}

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j) {
  const auto r = static_cast<Eigen::Index>(j.size());
  const auto c = r > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index k = 0; k < c; ++k)
      m(i, k) = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k));
  return m;
}

ordered_json vector_to_json(const Eigen::VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const ordered_json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = j.at(static_cast<std::size_t>(i));
  return v;
}

}  // namespace

Dataset generate(const SynthTruth& truth) {
  if (truth.n < 1) throw ConfigError("generate: n must be >= 1");
  for (std::size_t i = 1; i < truth.item_thresholds.size(); ++i)
    if (!(truth.item_thresholds[i] > truth.item_thresholds[i - 1]))
      throw ConfigError("generate: item thresholds must be strictly increasing");

  const SemModel model = SemModel::build(truth.spec, SemMode::Structural);
  const auto& params = truth.params;
  const int m = model.n_exogenous();
  const int q = model.n_endogenous();
  const int p = model.n_observed();
  if (params.lambda.rows() != p || params.phi.rows() != m ||
      params.a.rows() != q)
    throw ConfigError("generate: parameter dimensions do not match the model");

  Eigen::LLT<Eigen::MatrixXd> phi_llt(params.phi);
  if (m > 0 && phi_llt.info() != Eigen::Success)
    throw ConfigError("generate: phi is not positive definite");
  const Eigen::MatrixXd phi_chol =
      m > 0 ? Eigen::MatrixXd(phi_llt.matrixL()) : Eigen::MatrixXd(0, 0);

  Eigen::MatrixXd e_inv(q, q);
  if (q > 0) {
    e_inv = (Eigen::MatrixXd::Identity(q, q) - params.a).inverse();
    if (!e_inv.allFinite())
      throw ConfigError("generate: structural matrix (I - A) is singular");
  }

  const Eigen::MatrixXd sigma = implied_covariance(params);
  const Eigen::MatrixXd latent_cov = latent_covariance(params);

  // Model rows by kind, to route them to the right dataset columns.
  Dataset d;
  d.item_names = truth.spec.all_items();
  d.demographic_fields = truth.spec.controls;
  d.outcome_name = truth.spec.outcome;
  d.items.resize(truth.n, static_cast<Eigen::Index>(d.item_names.size()));
  d.demographics.resize(truth.n,
                        static_cast<Eigen::Index>(truth.spec.controls.size()));
  if (!truth.spec.outcome.empty()) d.outcome.resize(truth.n);

  std::vector<std::vector<double>> control_cuts;
  for (const auto& c : truth.spec.controls)
    control_cuts.push_back(level_quantile_cuts(c.levels.size()));

  // map model rows to dataset columns
  struct Route {
    enum { Item, Control, Outcome } kind;
    int column;
  };
  std::vector<Route> routes;
  for (const auto& name : model.observed_names()) {
    if (int j = d.item_index(name); j >= 0)
      routes.push_back({Route::Item, j});
    else if (int g = d.demographic_index(name); g >= 0)
      routes.push_back({Route::Control, g});
    else
      routes.push_back({Route::Outcome, 0});
  }
  // declared controls the structural model never references get independent
  // standard-normal draws so the emitted table still matches the schema
  std::vector<int> unmodeled_controls;
  for (std::size_t g = 0; g < truth.spec.controls.size(); ++g)
    if (model.latent_index(truth.spec.controls[g].name) < 0)
      unmodeled_controls.push_back(static_cast<int>(g));
  const bool outcome_modeled =
      !truth.spec.outcome.empty() &&
      model.latent_index(truth.spec.outcome) >= 0;

  for (int i = 0; i < truth.n; ++i) {
    Rng rng = Rng::derive(truth.seed, kRowStream, i);

    Eigen::VectorXd z(m);
    for (int a = 0; a < m; ++a) z(a) = rng.normal();
    const Eigen::VectorXd xi = m > 0 ? phi_chol * z : Eigen::VectorXd(0);
    Eigen::VectorXd eta(q);
    if (q > 0) {
      Eigen::VectorXd v(q);
      for (int a = 0; a < q; ++a)
        v(a) = std::sqrt(params.psi(a)) * rng.normal();
      eta = e_inv * (params.b * xi + v);
    }
    Eigen::VectorXd latent(m + q);
    latent.head(m) = xi;
    latent.tail(q) = eta;

    for (int r = 0; r < p; ++r) {
      double value = params.lambda.row(r) * latent;
      if (params.theta(r) > 0.0)
        value += std::sqrt(params.theta(r)) * rng.normal();
      const auto& route = routes[static_cast<std::size_t>(r)];
      switch (route.kind) {
        case Route::Item: {
          if (truth.discretize_items) {
            const double sd = std::sqrt(sigma(r, r));
            const int level =
                cut_level(value / sd, truth.item_thresholds);
            d.items(i, route.column) = 1.0 + level;
          } else {
            d.items(i, route.column) = value;
          }
          break;
        }
        case Route::Control: {
          const int l = model.latent_index(
              d.demographic_fields[static_cast<std::size_t>(route.column)].name);
          const double sd = std::sqrt(latent_cov(l, l));
          d.demographics(i, route.column) = cut_level(
              value / sd, control_cuts[static_cast<std::size_t>(route.column)]);
          break;
        }
        case Route::Outcome: {
          const double sd = std::sqrt(sigma(r, r));
          d.outcome(i) = std::max(
              truth.outcome_location + truth.outcome_scale * (value / sd),
              0.01);
          break;
        }
      }
    }

    Rng fill = Rng::derive(truth.seed, kFillStream, i);
    for (int g : unmodeled_controls)
      d.demographics(i, g) = cut_level(
          fill.normal(), control_cuts[static_cast<std::size_t>(g)]);
    if (!truth.spec.outcome.empty() && !outcome_modeled)
      d.outcome(i) = std::max(
          truth.outcome_location + truth.outcome_scale * fill.normal(), 0.01);

    d.respondent_ids.push_back(std::to_string(i + 1));
  }
  return d;
}

SemParameters standardized_parameters(
    const SemModel& model,
    const std::map<std::string, std::vector<double>>& loadings,
    const std::map<std::string, double>& paths,
    const Eigen::MatrixXd& exo_correlations) {
  const int m = model.n_exogenous();
  const int q = model.n_endogenous();
  const int p = model.n_observed();
  if (exo_correlations.rows() != m || exo_correlations.cols() != m)
    throw ConfigError("standardized_parameters: exogenous matrix size mismatch");

  SemParameters out;
  out.lambda = Eigen::MatrixXd::Zero(p, m + q);
  out.a = Eigen::MatrixXd::Zero(q, q);
  out.b = Eigen::MatrixXd::Zero(q, m);
  out.phi = exo_correlations;
  out.psi = Eigen::VectorXd::Zero(q);
  out.theta = Eigen::VectorXd::Zero(p);

  {
    Eigen::LLT<Eigen::MatrixXd> llt(out.phi);
    if (m > 0 && llt.info() != Eigen::Success)
      throw ValidationError(
          "standardized_parameters: exogenous correlations not positive "
          "definite");
  }

  const auto& latents = model.latents();
  for (std::size_t l = 0; l < latents.size(); ++l) {
    const auto& info = latents[l];
    if (info.kind != LatentKind::Construct) {
      out.lambda(info.indicator_rows[0], static_cast<Eigen::Index>(l)) = 1.0;
      continue;
    }
    const auto it = loadings.find(info.name);
    if (it == loadings.end() ||
        it->second.size() != info.indicator_rows.size())
      throw ConfigError("standardized_parameters: loadings for '" + info.name +
                        "' missing or wrong length");
    for (std::size_t k = 0; k < info.indicator_rows.size(); ++k) {
      const double lam = it->second[k];
      out.lambda(info.indicator_rows[k], static_cast<Eigen::Index>(l)) = lam;
      out.theta(info.indicator_rows[k]) = 1.0 - lam * lam;
      if (out.theta(info.indicator_rows[k]) < 0.0)
        throw ValidationError("standardized_parameters: |loading| > 1 for '" +
                              info.name + "'");
    }
  }

  for (const auto& [label, value] : paths) {
    const auto tilde = label.find('~');
    if (tilde == std::string::npos)
      throw ConfigError("standardized_parameters: bad path key '" + label + "'");
    const std::string target = label.substr(0, tilde);
    const std::string source = label.substr(tilde + 1);
    const auto ref = model.find_path(target, source);
    if (!ref)
      throw ConfigError("standardized_parameters: model has no path " + label);
    if (ref->matrix == ParamMatrix::A)
      out.a(ref->row, ref->col) = value;
    else
      out.b(ref->row, ref->col) = value;
  }

  // Solve disturbance variances so endogenous latents come out standardized.
  // Endogenous order is topological, so each target only depends on already
  // sized latents; grow the known latent covariance as we go.
  Eigen::MatrixXd known = Eigen::MatrixXd::Zero(m + q, m + q);
  known.topLeftCorner(m, m) = out.phi;
  for (int e = 0; e < q; ++e) {
    const int t = m + e;
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(m + q);
    coef.head(m) = out.b.row(e);
    coef.segment(m, q) = out.a.row(e);
    const double explained =
        coef.head(t).dot(known.topLeftCorner(t, t) * coef.head(t));
    if (explained >= 1.0)
      throw ValidationError(
          "standardized_parameters: explained variance >= 1 for '" +
          latents[static_cast<std::size_t>(t)].name + "'");
    out.psi(e) = 1.0 - explained;
    for (int j = 0; j < t; ++j)
      known(t, j) = known(j, t) =
          coef.head(t).dot(known.topLeftCorner(t, t).col(j));
    known(t, t) = 1.0;
  }
  return out;
}

std::string truth_to_json(const SynthTruth& truth) {
  ordered_json j;
  j["version"] = 1;
  j["model"] = to_model_text(truth.spec);
  j["n"] = truth.n;
  j["seed"] = truth.seed;
  j["likert_mode"] = truth.discretize_items ? "discretized" : "continuous";
  j["item_thresholds"] = truth.item_thresholds;
  j["outcome_location"] = truth.outcome_location;
  j["outcome_scale"] = truth.outcome_scale;
  ordered_json params;
  params["lambda"] = matrix_to_json(truth.params.lambda);
  params["a"] = matrix_to_json(truth.params.a);
  params["b"] = matrix_to_json(truth.params.b);
  params["phi"] = matrix_to_json(truth.params.phi);
  params["psi"] = vector_to_json(truth.params.psi);
  params["theta"] = vector_to_json(truth.params.theta);
  j["parameters"] = std::move(params);
  return j.dump(2) + "\n";
}

SynthTruth truth_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("truth JSON parse failure: ") + e.what());
  }
  SynthTruth truth;
  try {
    truth.spec = parse_model(j.at("model").get<std::string>());
    truth.n = j.at("n").get<int>();
    truth.seed = j.at("seed").get<std::uint64_t>();
    truth.discretize_items =
        j.at("likert_mode").get<std::string>() == "discretized";
    if (j.contains("item_thresholds"))
      truth.item_thresholds = j["item_thresholds"].get<std::vector<double>>();
    if (j.contains("outcome_location"))
      truth.outcome_location = j["outcome_location"].get<double>();
    if (j.contains("outcome_scale"))
      truth.outcome_scale = j["outcome_scale"].get<double>();
    const auto& params = j.at("parameters");
    truth.params.lambda = matrix_from_json(params.at("lambda"));
    truth.params.a = matrix_from_json(params.at("a"));
    truth.params.b = matrix_from_json(params.at("b"));
    truth.params.phi = matrix_from_json(params.at("phi"));
    truth.params.psi = vector_from_json(params.at("psi"));
    truth.params.theta = vector_from_json(params.at("theta"));
  } catch (const ordered_json::exception& e) {
    throw ConfigError(std::string("truth JSON missing field: ") + e.what());
  }
  return truth;
}

}  // namespace semann
