#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dwc/action_head.hpp"
#include "dwc/encoding.hpp"
#include "dwc/lut_layer.hpp"

namespace dwc {

enum class PolicyMode { kRelaxed, kHard };

/// Architecture of a weightless controller.
struct PolicyShape {
  int obs_dim = 0;
  int act_dim = 0;
  int layers = 2;
  int width = 1024;
  int arity = 6;
  int bits = 63;
  /// One flag per layer; a single entry applies to every layer.
  std::vector<bool> trainable_interconnect{true};
  double alpha_p_init = -3.0;
  double beta_init = 0.0;
  Squash squash = Squash::kTanh;
  GradientMode gradient = GradientMode::kExpectation;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Final layer width: smallest multiple of act_dim that is >= width.
  int padded_final_width() const;
};

/// Thermometer encoder, LUT layers and action head. The deployable artifact.
struct DwcPolicy {
  ThermometerSpec thresholds;
  RunningStats stats;
  std::vector<LutLayer> layers;
  ActionHead head;
  PolicyMode mode = PolicyMode::kRelaxed;
  GradientMode gradient = GradientMode::kExpectation;

  int obs_dim() const { return static_cast<int>(stats.dim()); }
  int act_dim() const { return head.actions; }
  int bits() const { return thresholds.bits; }
  int input_bits() const { return bits() * obs_dim(); }
  int final_width() const { return layers.empty() ? 0 : layers.back().width(); }

  /// Shape/consistency check; throws ShapeError or ConfigError.
  void check() const;
};

/// Builds a policy with seeded random parameters and empty statistics.
DwcPolicy init_policy(const PolicyShape& shape, std::uint64_t seed);

/// Thermometer bits of already-normalized observations, as 0/1 doubles.
void encode_normalized(const DwcPolicy& policy, std::span<const double> normalized,
                       std::span<double> out);

/// Final-layer popcount per action group in hard mode.
std::vector<int> hard_group_sums(const DwcPolicy& policy, std::span<const double> normalized);

/// Pre-squash logits of the discrete network (binarized tables, argmax wires).
std::vector<double> hard_logits(const DwcPolicy& policy, std::span<const double> normalized);

/// Pre-squash logits of the relaxed network.
std::vector<double> relaxed_logits(const DwcPolicy& policy, std::span<const double> normalized);

/// Pre-squash logits for a normalized observation, evaluated per policy.mode.
std::vector<double> policy_logits(const DwcPolicy& policy, std::span<const double> normalized);

/// Deterministic action (squashed mean) for a normalized observation.
std::vector<double> policy_action_normalized(const DwcPolicy& policy,
                                             std::span<const double> normalized);

/// Deterministic action for a raw observation: normalize, clip, encode, run.
std::vector<double> policy_action(const DwcPolicy& policy, std::span<const double> obs);

/// Copy of `policy` with a different evaluation mode.
DwcPolicy with_mode(DwcPolicy policy, PolicyMode mode);

}  // namespace dwc
