#include "dwc/mlp.hpp"

#include <cmath>
#include <string>

#include "dwc/errors.hpp"

namespace dwc {

Mlp::Mlp(std::vector<int> sizes, std::mt19937_64& rng, Activation hidden)
    : sizes_(std::move(sizes)), hidden_(hidden) {
  if (sizes_.size() < 2) throw ConfigError("Mlp needs at least input and output sizes");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    if (in <= 0 || out <= 0) throw ConfigError("Mlp layer sizes must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix w(out, in);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
    Vector b(out);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = dist(rng);
    weights_.push_back(std::move(w));
    biases_.push_back(std::move(b));
    weight_grads_.push_back(Matrix::Zero(out, in));
    bias_grads_.push_back(Vector::Zero(out));
  }
  inputs_.resize(weights_.size());
  pre_.resize(weights_.size());
}

Matrix Mlp::forward(const Matrix& x) {
  if (x.cols() != input_size()) {
    throw ShapeError("Mlp: expected " + std::to_string(input_size()) + " inputs, got " +
                     std::to_string(x.cols()));
  }
  Matrix h = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    inputs_[l] = h;
    pre_[l].noalias() = h * weights_[l].transpose();
    pre_[l].rowwise() += biases_[l].transpose();
    const bool last = l + 1 == weights_.size();
    if (!last && hidden_ == Activation::kRelu) {
      h = pre_[l].cwiseMax(0.0);
    } else {
      h = pre_[l];
    }
  }
  return h;
}

Matrix Mlp::predict(const Matrix& x) const {
  if (x.cols() != input_size()) {
    throw ShapeError("Mlp: expected " + std::to_string(input_size()) + " inputs, got " +
                     std::to_string(x.cols()));
  }
  Matrix h = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Matrix z = h * weights_[l].transpose();
    z.rowwise() += biases_[l].transpose();
    const bool last = l + 1 == weights_.size();
    h = (!last && hidden_ == Activation::kRelu) ? Matrix(z.cwiseMax(0.0)) : z;
  }
  return h;
}

Matrix Mlp::backward(const Matrix& dy, bool accumulate_params) {
  if (inputs_.empty() || inputs_.front().rows() == 0) {
    throw StateError("Mlp::backward called before forward");
  }
  Matrix g = dy;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    const bool last = l + 1 == weights_.size();
    if (!last && hidden_ == Activation::kRelu) {
      g = (pre_[l].array() > 0.0).select(g, 0.0);
    }
    if (accumulate_params) {
      weight_grads_[l].noalias() += g.transpose() * inputs_[l];
      bias_grads_[l] += g.colwise().sum().transpose();
    }
    Matrix next = g * weights_[l];
    g = std::move(next);
  }
  return g;
}

void Mlp::zero_grad() {
  for (auto& w : weight_grads_) w.setZero();
  for (auto& b : bias_grads_) b.setZero();
}

std::vector<ParamRef> Mlp::params() {
  std::vector<ParamRef> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back({{weights_[l].data(), static_cast<std::size_t>(weights_[l].size())},
                   {weight_grads_[l].data(), static_cast<std::size_t>(weight_grads_[l].size())}});
    out.push_back({{biases_[l].data(), static_cast<std::size_t>(biases_[l].size())},
                   {bias_grads_[l].data(), static_cast<std::size_t>(bias_grads_[l].size())}});
  }
  return out;
}

void Mlp::polyak_from(const Mlp& online, double tau) {
  if (online.sizes_ != sizes_) throw ShapeError("polyak_from: architecture mismatch");
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l] = (1.0 - tau) * weights_[l] + tau * online.weights_[l];
    biases_[l] = (1.0 - tau) * biases_[l] + tau * online.biases_[l];
  }
}

bool Mlp::all_finite() const {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
  }
  return true;
}

MlpGradients mlp_forward_backward(Mlp& net, const Matrix& input) {
  net.zero_grad();
  MlpGradients out;
  out.output = net.forward(input);
  out.input = net.backward(Matrix::Ones(out.output.rows(), out.output.cols()));
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    out.weights.push_back(net.weight_grad(l));
    out.biases.push_back(net.bias_grad(l));
  }
  return out;
}

}  // namespace dwc
