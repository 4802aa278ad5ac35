#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "dwc/encoding.hpp"
#include "dwc/mlp.hpp"
#include "dwc/optim.hpp"
#include "dwc/policy.hpp"

namespace dwc {

/// The trainable mean of a SAC policy. Inputs are normalized observations;
/// outputs are pre-squash logits.
class MeanModel {
 public:
  virtual ~MeanModel() = default;

  virtual int obs_dim() const = 0;
  virtual int act_dim() const = 0;
  virtual RunningStats& stats() = 0;
  virtual const RunningStats& stats() const = 0;

  /// Batched forward (batch x obs_dim) that records state for backward().
  virtual std::vector<double> forward_train(std::span<const double> normalized,
                                            std::size_t batch) = 0;
  /// Batched forward without recording state.
  virtual std::vector<double> forward_batch(std::span<const double> normalized,
                                            std::size_t batch) const = 0;
  /// Accumulates parameter gradients for d loss / d logits (batch x act_dim).
  virtual void backward(std::span<const double> dlogits) = 0;

  virtual std::vector<ParamRef> params() = 0;
  virtual void zero_grad() = 0;
  /// Hook run after every optimizer step.
  virtual void after_update() {}
  virtual bool finite() const = 0;

  /// Deterministic evaluation logits for one normalized observation.
  virtual std::vector<double> eval_logits(std::span<const double> normalized) const = 0;
};

/// Weightless controller as a SAC mean. Training runs the relaxed network;
/// evaluation runs `eval_mode` (hard by default, the deployable circuit).
class DwcActor final : public MeanModel {
 public:
  explicit DwcActor(DwcPolicy policy, PolicyMode eval_mode = PolicyMode::kHard);

  DwcPolicy& policy() { return policy_; }
  const DwcPolicy& policy() const { return policy_; }

  int obs_dim() const override { return policy_.obs_dim(); }
  int act_dim() const override { return policy_.act_dim(); }
  RunningStats& stats() override { return policy_.stats; }
  const RunningStats& stats() const override { return policy_.stats; }

  std::vector<double> forward_train(std::span<const double> normalized,
                                    std::size_t batch) override;
  std::vector<double> forward_batch(std::span<const double> normalized,
                                    std::size_t batch) const override;
  void backward(std::span<const double> dlogits) override;
  std::vector<ParamRef> params() override;
  void zero_grad() override;
  void after_update() override;
  bool finite() const override;
  std::vector<double> eval_logits(std::span<const double> normalized) const override;

  std::span<const double> table_grad(std::size_t layer) const { return table_grads_[layer]; }
  std::span<const double> interconnect_grad(std::size_t layer) const {
    return interconnect_grads_[layer];
  }
  std::span<const double> alpha_p_grad() const { return alpha_grad_; }
  std::span<const double> beta_grad() const { return beta_grad_; }

 private:
  std::vector<double> encode_batch(std::span<const double> normalized, std::size_t batch) const;

  DwcPolicy policy_;
  PolicyMode eval_mode_;
  std::vector<LayerCache> caches_;
  std::vector<double> final_;
  std::size_t batch_ = 0;
  std::vector<std::vector<double>> table_grads_;
  std::vector<std::vector<double>> interconnect_grads_;
  std::vector<double> alpha_grad_;
  std::vector<double> beta_grad_;
};

/// Floating-point baseline mean: obs -> hidden -> hidden -> act_dim (ReLU).
class MlpActor final : public MeanModel {
 public:
  MlpActor(int obs_dim, int act_dim, int hidden, std::mt19937_64& rng);

  Mlp& net() { return net_; }

  int obs_dim() const override { return net_.input_size(); }
  int act_dim() const override { return net_.output_size(); }
  RunningStats& stats() override { return stats_; }
  const RunningStats& stats() const override { return stats_; }

  std::vector<double> forward_train(std::span<const double> normalized,
                                    std::size_t batch) override;
  std::vector<double> forward_batch(std::span<const double> normalized,
                                    std::size_t batch) const override;
  void backward(std::span<const double> dlogits) override;
  std::vector<ParamRef> params() override { return net_.params(); }
  void zero_grad() override { net_.zero_grad(); }
  bool finite() const override { return net_.all_finite(); }
  std::vector<double> eval_logits(std::span<const double> normalized) const override;

 private:
  Mlp net_;
  RunningStats stats_;
};

}  // namespace dwc
