#include "dwc/policy.hpp"

#include <random>
#include <string>

#include "dwc/errors.hpp"

namespace dwc {

void PolicyShape::validate() const {
  if (obs_dim <= 0) throw ConfigError("obs_dim must be positive");
  if (act_dim <= 0) throw ConfigError("act_dim must be positive");
  if (layers <= 0) throw ConfigError("layers must be positive");
  if (width <= 0) throw ConfigError("width must be positive");
  if (arity < kMinArity || arity > kMaxArity) {
    throw ConfigError("arity must be in [2, 6], got " + std::to_string(arity));
  }
  if (bits < 3 || bits % 2 == 0) {
    throw ConfigError("bits must be odd and >= 3, got " + std::to_string(bits));
  }
  if (trainable_interconnect.empty() ||
      (trainable_interconnect.size() != 1 &&
       trainable_interconnect.size() != static_cast<std::size_t>(layers))) {
    throw ConfigError("trainable_interconnect needs one flag or one per layer");
  }
}

int PolicyShape::padded_final_width() const {
  return (width + act_dim - 1) / act_dim * act_dim;
}

void DwcPolicy::check() const {
  if (layers.empty()) throw ConfigError("policy has no layers");
  if (layers.front().in_width() != input_bits()) {
    throw ShapeError("first layer input width must equal bits x obs_dim");
  }
  for (std::size_t l = 1; l < layers.size(); ++l) {
    if (layers[l].in_width() != layers[l - 1].width()) {
      throw ShapeError("layer " + std::to_string(l) + " input width mismatch");
    }
  }
  if (final_width() != head.input_width()) {
    throw ShapeError("final width must equal actions x group_size");
  }
}

DwcPolicy init_policy(const PolicyShape& shape, std::uint64_t seed) {
  shape.validate();
  std::mt19937_64 rng(seed);
  DwcPolicy policy;
  policy.thresholds = compute_thresholds(shape.bits);
  policy.stats = RunningStats(static_cast<std::size_t>(shape.obs_dim));
  policy.gradient = shape.gradient;

  int in_width = shape.bits * shape.obs_dim;
  for (int l = 0; l < shape.layers; ++l) {
    const bool last = l + 1 == shape.layers;
    const int width = last ? shape.padded_final_width() : shape.width;
    const bool trainable = shape.trainable_interconnect.size() == 1
                               ? shape.trainable_interconnect.front()
                               : shape.trainable_interconnect[static_cast<std::size_t>(l)];
    LutLayer layer(in_width, width, shape.arity, trainable);
    layer.randomize(rng);
    policy.layers.push_back(std::move(layer));
    in_width = width;
  }

  policy.head.actions = shape.act_dim;
  policy.head.group_size = shape.padded_final_width() / shape.act_dim;
  policy.head.alpha_p.assign(static_cast<std::size_t>(shape.act_dim), shape.alpha_p_init);
  policy.head.beta.assign(static_cast<std::size_t>(shape.act_dim), shape.beta_init);
  policy.head.squash = shape.squash;
  return policy;
}

void encode_normalized(const DwcPolicy& policy, std::span<const double> normalized,
                       std::span<double> out) {
  const auto b = static_cast<std::size_t>(policy.bits());
  const auto& t = policy.thresholds.thresholds;
  for (std::size_t j = 0; j < normalized.size(); ++j) {
    for (std::size_t m = 0; m < b; ++m) out[j * b + m] = normalized[j] >= t[m] ? 1.0 : 0.0;
  }
}

namespace {

std::vector<std::uint8_t> hard_final_bits(const DwcPolicy& policy,
                                          std::span<const double> normalized) {
  if (normalized.size() != static_cast<std::size_t>(policy.obs_dim())) {
    throw ShapeError("policy: expected " + std::to_string(policy.obs_dim()) +
                     " observation dimensions, got " + std::to_string(normalized.size()));
  }
  std::vector<std::uint8_t> bits = encode(normalized, policy.thresholds);
  for (const auto& layer : policy.layers) bits = hard_forward(layer, bits);
  return bits;
}

}  // namespace

std::vector<int> hard_group_sums(const DwcPolicy& policy, std::span<const double> normalized) {
  const auto bits = hard_final_bits(policy, normalized);
  const auto g = static_cast<std::size_t>(policy.head.group_size);
  std::vector<int> sums(static_cast<std::size_t>(policy.act_dim()), 0);
  for (std::size_t i = 0; i < bits.size(); ++i) sums[i / g] += bits[i];
  return sums;
}

std::vector<double> hard_logits(const DwcPolicy& policy, std::span<const double> normalized) {
  const auto sums = hard_group_sums(policy, normalized);
  std::vector<double> logits(sums.size());
  for (std::size_t d = 0; d < sums.size(); ++d) {
    logits[d] = head_logit(policy.head.alpha_p[d], policy.head.beta[d],
                           static_cast<double>(sums[d]), policy.head.group_size);
  }
  return logits;
}

std::vector<double> relaxed_logits(const DwcPolicy& policy, std::span<const double> normalized) {
  if (normalized.size() != static_cast<std::size_t>(policy.obs_dim())) {
    throw ShapeError("policy: expected " + std::to_string(policy.obs_dim()) +
                     " observation dimensions, got " + std::to_string(normalized.size()));
  }
  std::vector<double> x(static_cast<std::size_t>(policy.input_bits()));
  encode_normalized(policy, normalized, x);
  for (const auto& layer : policy.layers) x = relaxed_forward(layer, x, 1, policy.gradient);
  return head_forward(policy.head, x);
}

std::vector<double> policy_logits(const DwcPolicy& policy, std::span<const double> normalized) {
  return policy.mode == PolicyMode::kHard ? hard_logits(policy, normalized)
                                          : relaxed_logits(policy, normalized);
}

std::vector<double> policy_action_normalized(const DwcPolicy& policy,
                                             std::span<const double> normalized) {
  auto logits = policy_logits(policy, normalized);
  for (auto& l : logits) l = apply_squash(policy.head.squash, l);
  return logits;
}

std::vector<double> policy_action(const DwcPolicy& policy, std::span<const double> obs) {
  if (obs.size() != static_cast<std::size_t>(policy.obs_dim())) {
    throw ShapeError("policy_action: expected " + std::to_string(policy.obs_dim()) +
                     " observation dimensions, got " + std::to_string(obs.size()));
  }
  const auto normalized = normalize_clip(obs, policy.stats);
  return policy_action_normalized(policy, normalized);
}

DwcPolicy with_mode(DwcPolicy policy, PolicyMode mode) {
  policy.mode = mode;
  return policy;
}

}  // namespace dwc
