#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "dwc/optim.hpp"

namespace dwc {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Activation { kRelu, kIdentity };

/// Dense feed-forward network, rows are samples: y = act(x W^T + b) per layer,
/// identity on the output layer. Used for the critics, the exploration head
/// and the floating-point baseline actor; never part of a deployed policy.
class Mlp {
 public:
  Mlp() = default;
  /// sizes = {in, hidden..., out}. Weights and biases ~ U(-1/sqrt(in), 1/sqrt(in)).
  Mlp(std::vector<int> sizes, std::mt19937_64& rng, Activation hidden = Activation::kRelu);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t num_layers() const { return weights_.size(); }

  Matrix& weight(std::size_t l) { return weights_[l]; }
  const Matrix& weight(std::size_t l) const { return weights_[l]; }
  Vector& bias(std::size_t l) { return biases_[l]; }
  const Vector& bias(std::size_t l) const { return biases_[l]; }
  const Matrix& weight_grad(std::size_t l) const { return weight_grads_[l]; }
  const Vector& bias_grad(std::size_t l) const { return bias_grads_[l]; }

  /// Forward pass that records activations for backward().
  Matrix forward(const Matrix& x);
  /// Forward pass without side effects.
  Matrix predict(const Matrix& x) const;

  /// Backpropagates dy through the last forward(); returns d loss / d x.
  /// Parameter gradients accumulate unless accumulate_params is false.
  Matrix backward(const Matrix& dy, bool accumulate_params = true);

  void zero_grad();
  std::vector<ParamRef> params();

  /// this <- (1 - tau) * this + tau * online.
  void polyak_from(const Mlp& online, double tau);

  bool all_finite() const;

 private:
  std::vector<int> sizes_;
  Activation hidden_ = Activation::kRelu;
  std::vector<Matrix> weights_;  // out x in
  std::vector<Vector> biases_;
  std::vector<Matrix> weight_grads_;
  std::vector<Vector> bias_grads_;
  std::vector<Matrix> inputs_;   // input to each layer
  std::vector<Matrix> pre_;      // pre-activation of each layer
};

struct MlpGradients {
  Matrix output;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Matrix input;
};

/// Value and gradients of sum(output) w.r.t. parameters and input.
MlpGradients mlp_forward_backward(Mlp& net, const Matrix& input);

}  // namespace dwc
