#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dwc {

/// A parameter block and its accumulated gradient.
struct ParamRef {
  std::span<double> value;
  std::span<const double> grad;
};

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::int64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
};

/// One bias-corrected Adam update of a single parameter block.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config);

/// Adam over a fixed list of parameter blocks.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(std::span<const ParamRef> params);
  const AdamConfig& config() const { return config_; }
  std::int64_t steps() const { return states_.empty() ? 0 : states_.front().step; }

 private:
  AdamConfig config_;
  std::vector<AdamState> states_;
};

}  // namespace dwc
