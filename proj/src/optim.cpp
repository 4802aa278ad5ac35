#include "dwc/optim.hpp"

#include <cmath>

#include "dwc/errors.hpp"

namespace dwc {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: size mismatch");
  if (state.m.empty() && state.step == 0) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw ShapeError("adam_step: state size mismatch");

  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

void Adam::step(std::span<const ParamRef> params) {
  if (states_.empty()) states_.resize(params.size());
  if (states_.size() != params.size()) throw ShapeError("Adam: parameter list changed");
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_step(params[i].value, params[i].grad, states_[i], config_);
  }
}

}  // namespace dwc
