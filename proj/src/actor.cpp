#include "dwc/actor.hpp"

#include <algorithm>
#include <cmath>

#include "dwc/errors.hpp"

namespace dwc {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::vector<double> to_vector(const Matrix& m) {
  return {m.data(), m.data() + m.size()};
}

}  // namespace

DwcActor::DwcActor(DwcPolicy policy, PolicyMode eval_mode)
    : policy_(std::move(policy)), eval_mode_(eval_mode) {
  policy_.check();
  policy_.mode = PolicyMode::kRelaxed;
  for (auto& layer : policy_.layers) {
    layer.refresh_selection();
    table_grads_.emplace_back(layer.table_logits().size(), 0.0);
    interconnect_grads_.emplace_back(
        layer.trainable_interconnect() ? layer.interconnect_logits().size() : 0, 0.0);
  }
  alpha_grad_.assign(policy_.head.alpha_p.size(), 0.0);
  beta_grad_.assign(policy_.head.beta.size(), 0.0);
  caches_.resize(policy_.layers.size());
}

std::vector<double> DwcActor::encode_batch(std::span<const double> normalized,
                                           std::size_t batch) const {
  const auto od = static_cast<std::size_t>(obs_dim());
  if (normalized.size() != batch * od) throw ShapeError("DwcActor: bad observation batch");
  const auto ib = static_cast<std::size_t>(policy_.input_bits());
  std::vector<double> x(batch * ib);
  for (std::size_t b = 0; b < batch; ++b) {
    encode_normalized(policy_, normalized.subspan(b * od, od),
                      std::span(x).subspan(b * ib, ib));
  }
  return x;
}

std::vector<double> DwcActor::forward_train(std::span<const double> normalized,
                                            std::size_t batch) {
  auto x = encode_batch(normalized, batch);
  for (std::size_t l = 0; l < policy_.layers.size(); ++l) {
    x = relaxed_forward(policy_.layers[l], x, batch, policy_.gradient, &caches_[l]);
  }
  final_ = x;
  batch_ = batch;
  return head_forward(policy_.head, final_, batch);
}

std::vector<double> DwcActor::forward_batch(std::span<const double> normalized,
                                            std::size_t batch) const {
  auto x = encode_batch(normalized, batch);
  for (const auto& layer : policy_.layers) {
    x = relaxed_forward(layer, x, batch, policy_.gradient);
  }
  return head_forward(policy_.head, x, batch);
}

void DwcActor::backward(std::span<const double> dlogits) {
  if (batch_ == 0) throw StateError("DwcActor::backward called before forward_train");
  const HeadGrad hg = head_backward(policy_.head, final_, dlogits, batch_);
  for (std::size_t d = 0; d < alpha_grad_.size(); ++d) {
    alpha_grad_[d] += hg.alpha_p[d];
    beta_grad_[d] += hg.beta[d];
  }
  std::vector<double> upstream = hg.final;
  for (std::size_t l = policy_.layers.size(); l-- > 0;) {
    LayerGrad g = dwc::backward(policy_.layers[l], caches_[l], upstream, l > 0);
    auto& tg = table_grads_[l];
    for (std::size_t i = 0; i < tg.size(); ++i) tg[i] += g.table[i];
    auto& ig = interconnect_grads_[l];
    for (std::size_t i = 0; i < ig.size(); ++i) ig[i] += g.interconnect[i];
    upstream = std::move(g.input);
  }
}

std::vector<ParamRef> DwcActor::params() {
  std::vector<ParamRef> out;
  for (std::size_t l = 0; l < policy_.layers.size(); ++l) {
    auto& layer = policy_.layers[l];
    out.push_back({layer.table_logits(), table_grads_[l]});
    if (layer.trainable_interconnect()) {
      out.push_back({layer.interconnect_logits(), interconnect_grads_[l]});
    }
  }
  out.push_back({policy_.head.alpha_p, alpha_grad_});
  out.push_back({policy_.head.beta, beta_grad_});
  return out;
}

void DwcActor::zero_grad() {
  for (auto& g : table_grads_) std::fill(g.begin(), g.end(), 0.0);
  for (auto& g : interconnect_grads_) std::fill(g.begin(), g.end(), 0.0);
  std::fill(alpha_grad_.begin(), alpha_grad_.end(), 0.0);
  std::fill(beta_grad_.begin(), beta_grad_.end(), 0.0);
}

void DwcActor::after_update() {
  for (auto& layer : policy_.layers) {
    if (layer.trainable_interconnect()) layer.refresh_selection();
  }
}

bool DwcActor::finite() const {
  for (const auto& layer : policy_.layers) {
    if (!all_finite(layer.table_logits()) || !all_finite(layer.interconnect_logits())) {
      return false;
    }
  }
  return all_finite(policy_.head.alpha_p) && all_finite(policy_.head.beta);
}

std::vector<double> DwcActor::eval_logits(std::span<const double> normalized) const {
  return eval_mode_ == PolicyMode::kHard ? hard_logits(policy_, normalized)
                                         : relaxed_logits(policy_, normalized);
}

MlpActor::MlpActor(int obs_dim, int act_dim, int hidden, std::mt19937_64& rng)
    : net_({obs_dim, hidden, hidden, act_dim}, rng),
      stats_(static_cast<std::size_t>(obs_dim)) {}

std::vector<double> MlpActor::forward_train(std::span<const double> normalized,
                                            std::size_t batch) {
  const Matrix x = Eigen::Map<const Matrix>(normalized.data(), static_cast<Eigen::Index>(batch),
                                            net_.input_size());
  return to_vector(net_.forward(x));
}

std::vector<double> MlpActor::forward_batch(std::span<const double> normalized,
                                            std::size_t batch) const {
  const Matrix x = Eigen::Map<const Matrix>(normalized.data(), static_cast<Eigen::Index>(batch),
                                            net_.input_size());
  return to_vector(net_.predict(x));
}

void MlpActor::backward(std::span<const double> dlogits) {
  const auto batch = static_cast<Eigen::Index>(dlogits.size()) / net_.output_size();
  const Matrix dy = Eigen::Map<const Matrix>(dlogits.data(), batch, net_.output_size());
  net_.backward(dy);
}

std::vector<double> MlpActor::eval_logits(std::span<const double> normalized) const {
  return forward_batch(normalized, 1);
}

}  // namespace dwc
