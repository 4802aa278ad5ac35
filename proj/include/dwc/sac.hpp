#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dwc/actor.hpp"
#include "dwc/env.hpp"
#include "dwc/mlp.hpp"
#include "dwc/optim.hpp"
#include "dwc/replay.hpp"

namespace dwc {

/// SAC hyperparameters. Defaults are the standard full-scale settings.
struct SacConfig {
  std::size_t buffer_size = 1'000'000;
  double gamma = 0.99;
  double tau = 0.005;
  std::size_t batch_size = 256;
  std::int64_t learning_starts = 5'000;
  double policy_lr = 3e-4;
  double q_lr = 1e-3;
  int policy_frequency = 2;
  int target_frequency = 1;
  bool autotune = true;
  double alpha = 0.2;  // initial (autotune) or fixed entropy coefficient
  int critic_hidden = 256;
  int explore_hidden = 64;
  double log_std_min = -5.0;
  double log_std_max = 2.0;
};

struct SacReport {
  bool updated = false;
  bool actor_updated = false;
  double q_loss = 0.0;
  double actor_loss = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;  // mean of -log pi over the actor batch
};

/// Soft actor-critic with twin floating-point critics. Only the mean of the
/// policy comes from `actor`; the exploration scale comes from a small
/// floating-point network. Critics see normalized observations and actions
/// in [-1, 1].
class SacAgent {
 public:
  SacAgent(std::unique_ptr<MeanModel> actor, const EnvSpec& spec, SacConfig config,
           std::uint64_t seed);

  MeanModel& actor() { return *actor_; }
  const MeanModel& actor() const { return *actor_; }
  std::unique_ptr<MeanModel> release_actor() { return std::move(actor_); }

  Mlp& q1() { return q1_; }
  Mlp& q2() { return q2_; }
  Mlp& q1_target() { return q1_target_; }
  Mlp& q2_target() { return q2_target_; }
  Mlp& explorer() { return explorer_; }
  const SacConfig& config() const { return config_; }
  double alpha() const;
  double log_alpha() const { return log_alpha_; }
  double target_entropy() const { return target_entropy_; }

  /// Stochastic action in [-1, 1] for one normalized observation.
  std::vector<double> explore(std::span<const double> normalized, std::mt19937_64& rng);
  /// Same as explore() with the Gaussian draw scaled by `noise_scale`.
  std::vector<double> explore(std::span<const double> normalized, std::mt19937_64& rng,
                              double noise_scale);

  /// One SAC iteration at environment step `global_step`. A buffer smaller
  /// than max(learning_starts, 1) yields a report with updated == false.
  SacReport update(const ReplayBuffer& buffer, std::int64_t global_step);

  /// Polyak update of both target critics with the configured tau.
  void update_targets();

  /// Critic and exploration-head gradients are frozen when true (tests).
  void set_freeze_critics(bool frozen) { freeze_critics_ = frozen; }

 private:
  struct Batch {
    Matrix obs;       // normalized
    Matrix action;    // unit range
    Vector reward;
    Matrix next_obs;  // normalized
    Vector done;
  };
  struct Sample {
    Matrix action;    // tanh squashed, unit range
    Vector log_prob;
    Matrix mean;
    Matrix log_std;
    Matrix raw_std;   // explorer output before the tanh rescale
    Matrix noise;
  };

  Batch gather(const ReplayBuffer& buffer);
  Sample sample_policy(const Matrix& obs, bool record);
  void critic_step(const Batch& batch);
  void actor_step(const Batch& batch, SacReport& report);
  Matrix unit_action(std::span<const double> env_action) const;

  std::unique_ptr<MeanModel> actor_;
  EnvSpec spec_;
  SacConfig config_;
  std::mt19937_64 rng_;
  Mlp explorer_;
  Mlp q1_, q2_, q1_target_, q2_target_;
  Adam actor_opt_;
  Adam q_opt_;
  Adam alpha_opt_;
  double log_alpha_ = 0.0;
  double log_alpha_grad_ = 0.0;
  double last_q_loss_ = 0.0;
  double target_entropy_ = 0.0;
  std::vector<double> scale_;  // half-range of each action dimension
  bool freeze_critics_ = false;
};

}  // namespace dwc
