#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace dwc {

struct EnvSpec {
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<double> act_low;
  std::vector<double> act_high;
};

/// Result of one environment step. `done` marks a terminal state (no
/// bootstrapping); `truncated` marks a time-limit cut.
struct StepResult {
  std::vector<double> obs;
  double reward = 0.0;
  bool done = false;
  bool truncated = false;
};

class Env {
 public:
  virtual ~Env() = default;
  virtual EnvSpec spec() = 0;
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  virtual StepResult step(std::span<const double> action) = 0;
};

/// Classic torque-limited pendulum swing-up.
struct PendulumState {
  double theta = 0.0;      // 0 is upright
  double theta_dot = 0.0;
};

struct PendulumStep {
  PendulumState state;
  double reward = 0.0;
};

inline constexpr double kPendulumMaxTorque = 2.0;
inline constexpr double kPendulumMaxSpeed = 8.0;
inline constexpr int kPendulumHorizon = 200;

double wrap_angle(double theta);

/// One 0.05 s step (g = 10, m = 1, l = 1). Torque is clipped to [-2, 2],
/// angular velocity to [-8, 8].
PendulumStep pendulum_step(const PendulumState& state, double torque);

class PendulumEnv final : public Env {
 public:
  EnvSpec spec() override;
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;

  /// Places the pendulum in a given state (tests and scripted rollouts).
  void set_state(const PendulumState& state);
  const PendulumState& state() const { return state_; }
  static std::vector<double> observe(const PendulumState& state);

 private:
  PendulumState state_;
  int t_ = 0;
};

/// Planar point mass driven towards a random goal; 100-step episodes.
class ReacherEnv final : public Env {
 public:
  EnvSpec spec() override;
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;

 private:
  std::vector<double> observe() const;

  double pos_[2] = {0, 0};
  double vel_[2] = {0, 0};
  double goal_[2] = {0, 0};
  int t_ = 0;
};

/// Builds an environment from a selector: "pendulum", "reacher",
/// "tcp://host:port" or "stdio:<command>" (the latter two use the bridge).
std::unique_ptr<Env> make_env(const std::string& selector);

/// Maps a squashed action in [-1, 1] to the environment bounds.
std::vector<double> scale_action(std::span<const double> unit, const EnvSpec& spec);

}  // namespace dwc
