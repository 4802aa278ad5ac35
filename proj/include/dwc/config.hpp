#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dwc/policy.hpp"
#include "dwc/sac.hpp"

namespace dwc {

/// Everything needed to reproduce one training run.
struct RunConfig {
  std::string preset;
  std::string env;                 // required
  std::int64_t total_steps = -1;   // required
  std::uint64_t seed = 1;
  std::string algorithm = "sac";   // "ppo" is reserved and rejected by train()
  std::string model = "dwc";       // "dwc" or "mlp" (floating-point baseline)

  int layers = 2;
  int width = 1024;
  int arity = 6;
  int bits = 63;
  std::vector<bool> trainable_interconnect{true};
  double alpha_p_init = -3.0;
  double beta_init = 0.0;
  Squash squash = Squash::kTanh;
  GradientMode gradient = GradientMode::kExpectation;
  int mlp_hidden = 256;

  SacConfig sac;

  std::int64_t eval_interval = 5'000;
  int eval_episodes = 10;
  PolicyMode eval_mode = PolicyMode::kHard;
  std::string output_dir = "runs";

  /// Throws ConfigError naming the first invalid or missing field.
  void validate() const;
  /// DWC architecture for an environment with the given dimensions.
  PolicyShape shape(int obs_dim, int act_dim) const;
};

/// Names of the shipped presets.
std::vector<std::string> preset_names();

/// Applies a preset on top of `config`; throws ConfigError for unknown names.
void apply_preset(RunConfig& config, const std::string& name);

/// Sets one key from its textual value; throws ConfigError on unknown keys or
/// malformed values. `preset` applies the preset.
void set_field(RunConfig& config, const std::string& key, const std::string& value);

/// Parses flat `key = value` text ('#' starts a comment). A `preset` line is
/// applied before all other keys regardless of its position. Does not validate.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical key/value view, keys in a fixed order.
std::vector<std::pair<std::string, std::string>> config_fields(const RunConfig& config);
std::string to_text(const RunConfig& config);

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& config);
std::uint64_t fnv1a64(const std::string& data);

}  // namespace dwc
