#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace semann {

struct AnnConfig {
  std::array<int, 2> hidden_sizes = {8, 4};
  int max_iterations = 1000;
  int folds = 10;
  std::uint64_t seed = 0;
  double scale_lo = 0.05;  // min-max target range, kept off the sigmoid rails
  double scale_hi = 0.95;
  int shuffle_repeats = 10;  // permutation-importance repetitions
  int workers = 1;
  double gradient_tol = 1e-6;
  double error_change_tol = 1e-12;
};

/// Per-column min-max map onto [lo, hi]; a constant column maps to the
/// midpoint. Captured from training data and reapplied verbatim.
struct MinMaxScaler {
  Eigen::VectorXd col_min;
  Eigen::VectorXd col_max;
  double lo = 0.05;
  double hi = 0.95;

  static MinMaxScaler fit(const Eigen::MatrixXd& x, double lo, double hi);
  Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
};

/// Fully connected network with sigmoid activations on both hidden layers
/// and the output. Weights live in one flat vector (matrices then biases,
/// layer by layer) so the trainer can treat them as a single point.
class Mlp {
 public:
  Mlp() = default;  // empty placeholder; assign a real network before use
  Mlp(int inputs, std::array<int, 2> hidden);

  int n_inputs() const { return sizes_.front(); }
  int n_weights() const { return n_weights_; }
  const std::vector<int>& layer_sizes() const { return sizes_; }

  /// Predictions (in (0,1)) for scaled inputs, one row per sample.
  Eigen::VectorXd predict(const Eigen::VectorXd& weights,
                          const Eigen::MatrixXd& x_scaled) const;

  double mse(const Eigen::VectorXd& weights, const Eigen::MatrixXd& x_scaled,
             const Eigen::VectorXd& y_scaled) const;

  /// Mean-squared error and its gradient via backpropagation.
  double mse_gradient(const Eigen::VectorXd& weights,
                      const Eigen::MatrixXd& x_scaled,
                      const Eigen::VectorXd& y_scaled,
                      Eigen::VectorXd& grad) const;

  /// Initial weights, uniform on [-0.5, 0.5], from the given seed.
  Eigen::VectorXd init_weights(std::uint64_t seed) const;

 private:
  std::vector<int> sizes_ = {0, 0, 0, 1};  // inputs, hidden1, hidden2, 1
  int n_weights_ = 0;
};

struct ScgResult {
  Eigen::VectorXd weights;
  int iterations = 0;
  double final_error = 0.0;
  bool converged = false;
  std::string stop_reason;
};

/// Scaled conjugate gradient minimization of the network error. Accepted
/// steps never increase the error; terminates on gradient norm, error
/// change, or the iteration cap.
ScgResult train_scg_weights(const Mlp& net, const Eigen::MatrixXd& x_scaled,
                            const Eigen::VectorXd& y_scaled,
                            const Eigen::VectorXd& w0, int max_iterations,
                            double gradient_tol, double error_change_tol);

struct AnnModel {
  Mlp net;
  Eigen::VectorXd weights;
  MinMaxScaler input_scaler;
  MinMaxScaler output_scaler;
  int iterations = 0;
  double training_rmse = 0.0;  // on scaled values
  std::vector<std::string> warnings;

  /// Scaled-space predictions for raw (unscaled) inputs.
  Eigen::VectorXd predict_scaled(const Eigen::MatrixXd& x_raw) const;
  /// RMSE between scaled predictions and scaled targets for raw data.
  double rmse_scaled(const Eigen::MatrixXd& x_raw,
                     const Eigen::VectorXd& y_raw) const;
};

/// Train on raw features/target: fits scalers, initializes from the config
/// seed, and runs scaled conjugate gradient on the scaled data. Warns when
/// rows are scarce relative to the parameter count or a feature is constant.
AnnModel train_scg(const Eigen::MatrixXd& x_raw, const Eigen::VectorXd& y_raw,
                   const AnnConfig& config);

/// Versioned JSON round-trip for a trained model.
std::string ann_model_to_json(const AnnModel& model);
AnnModel ann_model_from_json(const std::string& text);

}  // namespace semann
