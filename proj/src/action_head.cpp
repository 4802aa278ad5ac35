#include "dwc/action_head.hpp"

#include <cmath>

#include "dwc/errors.hpp"

namespace dwc {

Squash parse_squash(const std::string& name) {
  if (name == "tanh") return Squash::kTanh;
  if (name == "identity") return Squash::kIdentity;
  throw ConfigError("unknown squash '" + name + "' (expected tanh or identity)");
}

std::string to_string(Squash squash) {
  return squash == Squash::kTanh ? "tanh" : "identity";
}

double ActionHead::alpha(int d) const {
  return std::exp(alpha_p[static_cast<std::size_t>(d)]);
}

double head_logit(double alpha_p, double beta, double group_sum, int group_size) {
  return std::exp(alpha_p) * (group_sum / static_cast<double>(group_size) - 0.5) + beta;
}

double apply_squash(Squash squash, double logit) {
  return squash == Squash::kTanh ? std::tanh(logit) : logit;
}

namespace {

void check_head(const ActionHead& head, std::size_t final_size, std::size_t batch) {
  if (head.actions <= 0 || head.group_size <= 0 ||
      head.alpha_p.size() != static_cast<std::size_t>(head.actions) ||
      head.beta.size() != static_cast<std::size_t>(head.actions)) {
    throw ConfigError("action head partition does not cover the final layer");
  }
  if (final_size != batch * static_cast<std::size_t>(head.input_width())) {
    throw ConfigError("final layer width is not actions x group_size");
  }
}

}  // namespace

std::vector<double> head_forward(const ActionHead& head, std::span<const double> final,
                                 std::size_t batch) {
  check_head(head, final.size(), batch);
  const auto width = static_cast<std::size_t>(head.input_width());
  const auto g = static_cast<std::size_t>(head.group_size);
  std::vector<double> logits(batch * static_cast<std::size_t>(head.actions));
  for (std::size_t b = 0; b < batch; ++b) {
    for (int d = 0; d < head.actions; ++d) {
      const double* row = final.data() + b * width + static_cast<std::size_t>(d) * g;
      double s = 0.0;
      for (std::size_t i = 0; i < g; ++i) s += row[i];
      const auto du = static_cast<std::size_t>(d);
      logits[b * static_cast<std::size_t>(head.actions) + du] =
          head_logit(head.alpha_p[du], head.beta[du], s, head.group_size);
    }
  }
  return logits;
}

HeadGrad head_backward(const ActionHead& head, std::span<const double> final,
                       std::span<const double> dlogits, std::size_t batch) {
  check_head(head, final.size(), batch);
  const auto acts = static_cast<std::size_t>(head.actions);
  if (dlogits.size() != batch * acts) throw ShapeError("head_backward: bad gradient size");
  const auto width = static_cast<std::size_t>(head.input_width());
  const auto g = static_cast<std::size_t>(head.group_size);

  HeadGrad grad;
  grad.alpha_p.assign(acts, 0.0);
  grad.beta.assign(acts, 0.0);
  grad.final.assign(batch * width, 0.0);
  for (std::size_t d = 0; d < acts; ++d) {
    const double alpha = std::exp(head.alpha_p[d]);
    const double per_bit = alpha / static_cast<double>(g);
    for (std::size_t b = 0; b < batch; ++b) {
      const double dl = dlogits[b * acts + d];
      const double* row = final.data() + b * width + d * g;
      double s = 0.0;
      for (std::size_t i = 0; i < g; ++i) s += row[i];
      const double z = s / static_cast<double>(g) - 0.5;
      grad.beta[d] += dl;
      grad.alpha_p[d] += dl * alpha * z;
      double* out = grad.final.data() + b * width + d * g;
      for (std::size_t i = 0; i < g; ++i) out[i] = dl * per_bit;
    }
  }
  return grad;
}

}  // namespace dwc
