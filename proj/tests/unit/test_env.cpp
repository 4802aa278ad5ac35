#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "dwc/env.hpp"
#include "dwc/errors.hpp"

using namespace dwc;

namespace {

// Independent pendulum integrator written from the textbook equations.
struct Oracle {
  double th;
  double thdot;

  double step(double u) {
    u = std::min(2.0, std::max(-2.0, u));
    double a = std::atan2(std::sin(th), std::cos(th));
    const double r = -(a * a + 0.1 * thdot * thdot + 0.001 * u * u);
    thdot += (15.0 * std::sin(th) + 3.0 * u) * 0.05;
    thdot = std::min(8.0, std::max(-8.0, thdot));
    th += thdot * 0.05;
    return r;
  }
};

}  // namespace

TEST_CASE("wrap_angle lands in [-pi, pi)") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(2.0 * std::numbers::pi + 0.5) == doctest::Approx(0.5));
  CHECK(wrap_angle(-2.0 * std::numbers::pi - 0.5) == doctest::Approx(-0.5));
  CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(-std::numbers::pi));
}

TEST_CASE("scripted pendulum rollout matches the oracle") {
  PendulumEnv env;
  env.set_state({2.5, -0.3});
  Oracle o{2.5, -0.3};
  for (int t = 0; t < 150; ++t) {
    const double u = 3.0 * std::sin(0.37 * t);  // exceeds the torque limit at times
    const std::vector<double> a{u};
    const auto r = env.step(a);
    const double expected = o.step(u);
    REQUIRE(r.reward == doctest::Approx(expected).epsilon(1e-12));
    CHECK(r.obs[0] == doctest::Approx(std::cos(o.th)).epsilon(1e-12));
    CHECK(r.obs[1] == doctest::Approx(std::sin(o.th)).epsilon(1e-12));
    CHECK(r.obs[2] == doctest::Approx(o.thdot).epsilon(1e-12));
    CHECK_FALSE(r.done);
  }
}

TEST_CASE("upright and still gives zero cost") {
  const auto s = pendulum_step({0.0, 0.0}, 0.0);
  CHECK(s.reward == 0.0);
  CHECK(s.state.theta == 0.0);
}

TEST_CASE("speed is clipped") {
  const auto s = pendulum_step({std::numbers::pi / 2, 7.9}, 2.0);
  CHECK(s.state.theta_dot == 8.0);
}

TEST_CASE("reset is seeded and truncates at the horizon") {
  PendulumEnv a, b;
  CHECK(a.reset(7) == b.reset(7));
  CHECK(a.reset(7) != a.reset(8));
  const auto obs = a.reset(3);
  CHECK(obs.size() == 3);
  CHECK(std::abs(a.state().theta_dot) <= 1.0);
  const std::vector<double> zero{0.0};
  for (int t = 1; t <= kPendulumHorizon; ++t) {
    const auto r = a.step(zero);
    CHECK(r.truncated == (t == kPendulumHorizon));
  }
  const std::vector<double> two{0.0, 0.0};
  CHECK_THROWS_AS(a.step(two), ShapeError);
}

TEST_CASE("reacher episode") {
  ReacherEnv env;
  const auto obs = env.reset(1);
  REQUIRE(obs.size() == 6);
  const std::vector<double> push{obs[4] > 0 ? 1.0 : -1.0, obs[5] > 0 ? 1.0 : -1.0};
  StepResult r;
  for (int t = 0; t < 100; ++t) r = env.step(push);
  CHECK(r.truncated);
  CHECK(r.reward < 0.0);
}

TEST_CASE("make_env and scale_action") {
  CHECK(make_env("pendulum")->spec().obs_dim == 3);
  CHECK(make_env("reacher")->spec().act_dim == 2);
  CHECK_THROWS_AS(make_env("cartpole"), ConfigError);
  const auto spec = PendulumEnv().spec();
  const std::vector<double> u{-1.0};
  CHECK(scale_action(u, spec)[0] == -2.0);
  const std::vector<double> h{0.5};
  CHECK(scale_action(h, spec)[0] == 1.0);
}
