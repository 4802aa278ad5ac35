#include "dwc/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dwc/bridge.hpp"
#include "dwc/errors.hpp"

namespace dwc {

namespace {

constexpr double kGravity = 10.0;
constexpr double kMass = 1.0;
constexpr double kLength = 1.0;
constexpr double kDt = 0.05;

}  // namespace

double wrap_angle(double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  return std::fmod(std::fmod(theta + std::numbers::pi, two_pi) + two_pi, two_pi) -
         std::numbers::pi;
}

PendulumStep pendulum_step(const PendulumState& state, double torque) {
  const double u = std::clamp(torque, -kPendulumMaxTorque, kPendulumMaxTorque);
  const double th = wrap_angle(state.theta);
  const double cost = th * th + 0.1 * state.theta_dot * state.theta_dot + 0.001 * u * u;

  double thdot = state.theta_dot +
                 (3.0 * kGravity / (2.0 * kLength) * std::sin(state.theta) +
                  3.0 / (kMass * kLength * kLength) * u) *
                     kDt;
  thdot = std::clamp(thdot, -kPendulumMaxSpeed, kPendulumMaxSpeed);
  PendulumStep out;
  out.state.theta = state.theta + thdot * kDt;
  out.state.theta_dot = thdot;
  out.reward = -cost;
  return out;
}

EnvSpec PendulumEnv::spec() {
  return {3, 1, {-kPendulumMaxTorque}, {kPendulumMaxTorque}};
}

std::vector<double> PendulumEnv::observe(const PendulumState& state) {
  return {std::cos(state.theta), std::sin(state.theta), state.theta_dot};
}

std::vector<double> PendulumEnv::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> speed(-1.0, 1.0);
  state_.theta = angle(rng);
  state_.theta_dot = speed(rng);
  t_ = 0;
  return observe(state_);
}

void PendulumEnv::set_state(const PendulumState& state) {
  state_ = state;
  t_ = 0;
}

StepResult PendulumEnv::step(std::span<const double> action) {
  if (action.size() != 1) throw ShapeError("pendulum: expected 1 action dimension");
  const auto next = pendulum_step(state_, action[0]);
  state_ = next.state;
  ++t_;
  return {observe(state_), next.reward, false, t_ >= kPendulumHorizon};
}

EnvSpec ReacherEnv::spec() { return {6, 2, {-1.0, -1.0}, {1.0, 1.0}}; }

std::vector<double> ReacherEnv::observe() const {
  return {pos_[0], pos_[1], vel_[0], vel_[1], goal_[0] - pos_[0], goal_[1] - pos_[1]};
}

std::vector<double> ReacherEnv::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  for (int i = 0; i < 2; ++i) {
    pos_[i] = box(rng);
    vel_[i] = 0.0;
    goal_[i] = box(rng);
  }
  t_ = 0;
  return observe();
}

StepResult ReacherEnv::step(std::span<const double> action) {
  if (action.size() != 2) throw ShapeError("reacher: expected 2 action dimensions");
  constexpr double dt = 0.1;
  constexpr double damping = 0.5;
  double effort = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double f = std::clamp(action[static_cast<std::size_t>(i)], -1.0, 1.0);
    effort += f * f;
    vel_[i] = std::clamp(vel_[i] + (f - damping * vel_[i]) * dt, -2.0, 2.0);
    pos_[i] = std::clamp(pos_[i] + vel_[i] * dt, -2.0, 2.0);
  }
  ++t_;
  const double dist = std::hypot(goal_[0] - pos_[0], goal_[1] - pos_[1]);
  return {observe(), -dist - 0.01 * effort, false, t_ >= 100};
}

std::unique_ptr<Env> make_env(const std::string& selector) {
  if (selector == "pendulum") return std::make_unique<PendulumEnv>();
  if (selector == "reacher") return std::make_unique<ReacherEnv>();
  if (selector.starts_with("tcp://") || selector.starts_with("stdio:")) {
    return std::make_unique<BridgeEnv>(selector);
  }
  throw ConfigError("unknown environment '" + selector +
                    "' (expected pendulum, reacher, tcp://host:port or stdio:<cmd>)");
}

std::vector<double> scale_action(std::span<const double> unit, const EnvSpec& spec) {
  std::vector<double> out(unit.size());
  for (std::size_t d = 0; d < unit.size(); ++d) {
    const double half = 0.5 * (spec.act_high[d] - spec.act_low[d]);
    const double mid = 0.5 * (spec.act_high[d] + spec.act_low[d]);
    out[d] = unit[d] * half + mid;
  }
  return out;
}

}  // namespace dwc
