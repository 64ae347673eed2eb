#include "semann/ann.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "semann/errors.hpp"
#include "semann/rng.hpp"

namespace semann {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;  // "init"

inline Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) {
  return 1.0 / (1.0 + (-z).exp());
}

}  // namespace

MinMaxScaler MinMaxScaler::fit(const Eigen::MatrixXd& x, double lo, double hi) {
  MinMaxScaler s;
  s.lo = lo;
  s.hi = hi;
  s.col_min = x.colwise().minCoeff();
  s.col_max = x.colwise().maxCoeff();
  return s;
}

Eigen::MatrixXd MinMaxScaler::transform(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double span = col_max(j) - col_min(j);
    if (span <= 0.0) {
      out.col(j).setConstant(0.5 * (lo + hi));
    } else {
      out.col(j) =
          ((x.col(j).array() - col_min(j)) / span * (hi - lo) + lo).matrix();
    }
  }
  return out;
}

Mlp::Mlp(int inputs, std::array<int, 2> hidden) {
  if (inputs < 1 || hidden[0] < 1 || hidden[1] < 1)
    throw ConfigError("Mlp: layer sizes must be positive");
  sizes_ = {inputs, hidden[0], hidden[1], 1};
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l)
    n_weights_ += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
}

namespace {

struct LayerView {
  Eigen::Map<const Eigen::MatrixXd> w;
  Eigen::Map<const Eigen::VectorXd> b;
};

// Walk the flat vector layer by layer: W (out x in, column-major), then bias.
std::vector<LayerView> map_layers(const std::vector<int>& sizes,
                                  const Eigen::VectorXd& flat) {
  std::vector<LayerView> out;
  const double* p = flat.data();
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int rows = sizes[l + 1], cols = sizes[l];
    out.push_back({Eigen::Map<const Eigen::MatrixXd>(p, rows, cols),
                   Eigen::Map<const Eigen::VectorXd>(p + rows * cols, rows)});
    p += rows * cols + rows;
  }
  return out;
}

}  // namespace

Eigen::VectorXd Mlp::predict(const Eigen::VectorXd& weights,
                             const Eigen::MatrixXd& x_scaled) const {
  const auto layers = map_layers(sizes_, weights);
  Eigen::MatrixXd a = x_scaled.transpose();
  for (const auto& layer : layers)
    a = sigmoid(((layer.w * a).colwise() + layer.b).array()).matrix();
  return a.row(0).transpose();
}

double Mlp::mse(const Eigen::VectorXd& weights, const Eigen::MatrixXd& x_scaled,
                const Eigen::VectorXd& y_scaled) const {
  const Eigen::VectorXd pred = predict(weights, x_scaled);
  return (pred - y_scaled).squaredNorm() / static_cast<double>(y_scaled.size());
}

double Mlp::mse_gradient(const Eigen::VectorXd& weights,
                         const Eigen::MatrixXd& x_scaled,
                         const Eigen::VectorXd& y_scaled,
                         Eigen::VectorXd& grad) const {
  const auto layers = map_layers(sizes_, weights);
  const auto n = x_scaled.rows();

  // forward pass keeping activations per layer
  std::vector<Eigen::MatrixXd> act;
  act.reserve(sizes_.size());
  act.push_back(x_scaled.transpose());
  for (const auto& layer : layers)
    act.push_back(
        sigmoid(((layer.w * act.back()).colwise() + layer.b).array()).matrix());

  const Eigen::RowVectorXd residual =
      act.back().row(0) - y_scaled.transpose();
  const double mse = residual.squaredNorm() / static_cast<double>(n);

  grad.resize(n_weights_);
  // delta for the output layer, then walk backwards
  Eigen::MatrixXd delta =
      ((2.0 / static_cast<double>(n)) * residual.array() *
       act.back().row(0).array() * (1.0 - act.back().row(0).array()))
          .matrix();
  double* gp = grad.data() + n_weights_;
  for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
    const int rows = sizes_[static_cast<std::size_t>(l) + 1];
    const int cols = sizes_[static_cast<std::size_t>(l)];
    gp -= rows * cols + rows;
    Eigen::Map<Eigen::MatrixXd> gw(gp, rows, cols);
    Eigen::Map<Eigen::VectorXd> gb(gp + rows * cols, rows);
    gw.noalias() = delta * act[static_cast<std::size_t>(l)].transpose();
    gb = delta.rowwise().sum();
    if (l > 0) {
      const auto& a = act[static_cast<std::size_t>(l)];
      delta = ((layers[static_cast<std::size_t>(l)].w.transpose() * delta)
                   .array() *
               a.array() * (1.0 - a.array()))
                  .matrix();
    }
  }
  return mse;
}

Eigen::VectorXd Mlp::init_weights(std::uint64_t seed) const {
  Rng rng = Rng::derive(seed, kInitStream);
  Eigen::VectorXd w(n_weights_);
  for (int i = 0; i < n_weights_; ++i) w(i) = rng.uniform(-0.5, 0.5);
  return w;
}

ScgResult train_scg_weights(const Mlp& net, const Eigen::MatrixXd& x_scaled,
                            const Eigen::VectorXd& y_scaled,
                            const Eigen::VectorXd& w0, int max_iterations,
                            double gradient_tol, double error_change_tol) {
  const int n = net.n_weights();
  constexpr double kSigma = 1e-4;
  constexpr double kLambdaMax = 1e15;

  ScgResult res;
  res.weights = w0;

  Eigen::VectorXd grad(n);
  double error = net.mse_gradient(res.weights, x_scaled, y_scaled, grad);
  if (!std::isfinite(error))
    throw NumericError("train_scg: non-finite loss at iteration 0");
  Eigen::VectorXd r = -grad;
  Eigen::VectorXd p = r;
  double lambda = 1e-6;
  double lambda_bar = 0.0;
  bool success = true;
  double delta = 0.0;
  Eigen::VectorXd grad_trial(n);

  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    if (r.lpNorm<Eigen::Infinity>() < gradient_tol) {
      res.converged = true;
      res.stop_reason = "gradient below tolerance";
      break;
    }

    const double p_sq = p.squaredNorm();
    if (success) {
      double mu = p.dot(r);
      if (mu <= 0.0) {  // conjugacy lost; restart along the gradient
        p = r;
        continue;
      }
      const double sigma_k = kSigma / std::sqrt(p_sq);
      net.mse_gradient(res.weights + sigma_k * p, x_scaled, y_scaled,
                       grad_trial);
      delta = p.dot((grad_trial + r) / sigma_k);  // p' (E'(w+sp) - E'(w)) / s
    }
    delta += (lambda - lambda_bar) * p_sq;
    if (delta <= 0.0) {  // force the local Hessian model positive definite
      lambda_bar = 2.0 * (lambda - delta / p_sq);
      delta = -delta + lambda * p_sq;
      lambda = lambda_bar;
    }

    const double mu = p.dot(r);
    const double alpha = mu / delta;
    const Eigen::VectorXd w_new = res.weights + alpha * p;
    const double error_new = net.mse(w_new, x_scaled, y_scaled);
    if (!std::isfinite(error_new))
      throw NumericError("train_scg: non-finite loss at iteration " +
                         std::to_string(res.iterations));
    const double comparison = 2.0 * delta * (error - error_new) / (mu * mu);

    if (comparison >= 0.0) {
      const double error_drop = error - error_new;
      res.weights = w_new;
      error = error_new;
      net.mse_gradient(res.weights, x_scaled, y_scaled, grad);
      const Eigen::VectorXd r_new = -grad;
      lambda_bar = 0.0;
      success = true;
      if ((res.iterations + 1) % n == 0) {
        p = r_new;  // periodic restart
      } else {
        const double beta = (r_new.squaredNorm() - r_new.dot(r)) / mu;
        p = r_new + beta * p;
      }
      r = r_new;
      if (comparison >= 0.75) lambda *= 0.25;
      if (error_drop < error_change_tol) {
        ++res.iterations;
        res.converged = true;
        res.stop_reason = "error change below tolerance";
        break;
      }
    } else {
      lambda_bar = lambda;
      success = false;
    }
    if (comparison < 0.25) lambda += delta * (1.0 - comparison) / p_sq;
    if (lambda > kLambdaMax) {
      res.converged = true;
      res.stop_reason = "trust damping saturated (stationary to precision)";
      break;
    }
  }
  if (res.stop_reason.empty()) res.stop_reason = "iteration cap reached";
  res.final_error = error;
  return res;
}

Eigen::VectorXd AnnModel::predict_scaled(const Eigen::MatrixXd& x_raw) const {
  return net.predict(weights, input_scaler.transform(x_raw));
}

double AnnModel::rmse_scaled(const Eigen::MatrixXd& x_raw,
                             const Eigen::VectorXd& y_raw) const {
  const Eigen::VectorXd pred = predict_scaled(x_raw);
  const Eigen::VectorXd y_scaled = output_scaler.transform(y_raw);
  return std::sqrt((pred - y_scaled).squaredNorm() /
                   static_cast<double>(y_raw.size()));
}

AnnModel train_scg(const Eigen::MatrixXd& x_raw, const Eigen::VectorXd& y_raw,
                   const AnnConfig& config) {
  if (x_raw.rows() != y_raw.size())
    throw ConfigError("train_scg: feature/target row mismatch");
  if (x_raw.rows() < 2) throw DataError("train_scg: needs at least 2 rows");

  AnnModel model{Mlp(static_cast<int>(x_raw.cols()), config.hidden_sizes),
                 {}, {}, {}};
  model.input_scaler =
      MinMaxScaler::fit(x_raw, config.scale_lo, config.scale_hi);
  model.output_scaler =
      MinMaxScaler::fit(y_raw, config.scale_lo, config.scale_hi);

  for (Eigen::Index j = 0; j < x_raw.cols(); ++j)
    if (model.input_scaler.col_max(j) - model.input_scaler.col_min(j) <= 0.0)
      model.warnings.push_back("feature " + std::to_string(j) +
                               " is constant after scaling");
  if (5 * x_raw.rows() < model.net.n_weights())
    model.warnings.push_back(
        "training rows are scarce relative to the parameter count (" +
        std::to_string(x_raw.rows()) + " rows, " +
        std::to_string(model.net.n_weights()) + " weights)");

  const Eigen::MatrixXd x_scaled = model.input_scaler.transform(x_raw);
  const Eigen::VectorXd y_scaled = model.output_scaler.transform(y_raw);

  const ScgResult fit = train_scg_weights(
      model.net, x_scaled, y_scaled, model.net.init_weights(config.seed),
      config.max_iterations, config.gradient_tol, config.error_change_tol);
  model.weights = fit.weights;
  model.iterations = fit.iterations;
  model.training_rmse = std::sqrt(fit.final_error);
  return model;
}

std::string ann_model_to_json(const AnnModel& model) {
  nlohmann::ordered_json j;
  j["format"] = "ann-model";
  j["version"] = 1;
  j["layer_sizes"] = model.net.layer_sizes();
  j["weights"] = std::vector<double>(
      model.weights.data(), model.weights.data() + model.weights.size());
  auto scaler = [](const MinMaxScaler& s) {
    nlohmann::ordered_json out;
    out["lo"] = s.lo;
    out["hi"] = s.hi;
    out["col_min"] =
        std::vector<double>(s.col_min.data(), s.col_min.data() + s.col_min.size());
    out["col_max"] =
        std::vector<double>(s.col_max.data(), s.col_max.data() + s.col_max.size());
    return out;
  };
  j["input_scaler"] = scaler(model.input_scaler);
  j["output_scaler"] = scaler(model.output_scaler);
  j["iterations"] = model.iterations;
  j["training_rmse"] = model.training_rmse;
  return j.dump(2) + "\n";
}

AnnModel ann_model_from_json(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model JSON parse failure: ") + e.what());
  }
  if (j.value("format", "") != "ann-model" || j.value("version", 0) != 1)
    throw ConfigError("model JSON: unsupported format or version");
  const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
  if (sizes.size() != 4 || sizes.back() != 1)
    throw ConfigError("model JSON: unexpected layer layout");

  AnnModel model{Mlp(sizes[0], {sizes[1], sizes[2]}), {}, {}, {}};
  const auto w = j.at("weights").get<std::vector<double>>();
  if (static_cast<int>(w.size()) != model.net.n_weights())
    throw ConfigError("model JSON: weight count mismatch");
  model.weights =
      Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  auto scaler = [](const nlohmann::ordered_json& s) {
    MinMaxScaler out;
    out.lo = s.at("lo").get<double>();
    out.hi = s.at("hi").get<double>();
    const auto mn = s.at("col_min").get<std::vector<double>>();
    const auto mx = s.at("col_max").get<std::vector<double>>();
    out.col_min = Eigen::Map<const Eigen::VectorXd>(
        mn.data(), static_cast<Eigen::Index>(mn.size()));
    out.col_max = Eigen::Map<const Eigen::VectorXd>(
        mx.data(), static_cast<Eigen::Index>(mx.size()));
    return out;
  };
  model.input_scaler = scaler(j.at("input_scaler"));
  model.output_scaler = scaler(j.at("output_scaler"));
  model.iterations = j.value("iterations", 0);
  model.training_rmse = j.value("training_rmse", 0.0);
  return model;
}

}  // namespace semann
