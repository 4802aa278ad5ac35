#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "dwc/config.hpp"
#include "dwc/encoding.hpp"
#include "dwc/env.hpp"
#include "dwc/errors.hpp"
#include "dwc/policy.hpp"
#include "dwc/train.hpp"
#include "test_util.hpp"

using namespace dwc;

namespace {

RunConfig tiny_config() {
  auto c = parse_config(
      "env = pendulum\n"
      "total_steps = 500\n"
      "layers = 2\n"
      "width = 16\n"
      "arity = 4\n"
      "bits = 7\n"
      "learning_starts = 200\n"
      "batch_size = 32\n"
      "critic_hidden = 16\n"
      "explore_hidden = 8\n"
      "eval_interval = 250\n"
      "eval_episodes = 2\n");
  return c;
}

// Pendulum that pays an absurd reward so the critic loss overflows.
class Exploding final : public Env {
 public:
  EnvSpec spec() override { return inner_.spec(); }
  std::vector<double> reset(std::uint64_t seed) override { return inner_.reset(seed); }
  StepResult step(std::span<const double> a) override {
    auto r = inner_.step(a);
    r.reward = 1e300;
    return r;
  }

 private:
  PendulumEnv inner_;
};

}  // namespace

TEST_CASE("noise-free evaluation equals a plain rollout") {
  const auto policy = dwc::testing::random_policy(3, 1, 2, 16, 4, 7, 3);
  PendulumEnv env;
  const EvalOptions opts{3, 0.0, 100};
  const auto r = evaluate(policy, env, opts);
  REQUIRE(r.returns.size() == 3);
  double mean = 0.0;
  for (int e = 0; e < 3; ++e) {
    PendulumEnv local;
    auto obs = local.reset(100 + static_cast<std::uint64_t>(e));
    double ret = 0.0;
    for (;;) {
      const auto unit = policy_action_normalized(policy, normalize_clip(obs, policy.stats));
      const auto s = local.step(scale_action(unit, local.spec()));
      ret += s.reward;
      obs = s.obs;
      if (s.done || s.truncated) break;
    }
    CHECK(r.returns[static_cast<std::size_t>(e)] == ret);
    mean += ret / 3.0;
  }
  CHECK(r.mean == doctest::Approx(mean));
}

TEST_CASE("observation noise changes returns reproducibly") {
  const auto policy = dwc::testing::random_policy(3, 1, 2, 16, 4, 7, 3);
  PendulumEnv env;
  const auto clean = evaluate(policy, env, {2, 0.0, 5});
  const auto noisy = evaluate(policy, env, {2, 0.5, 5});
  const auto again = evaluate(policy, env, {2, 0.5, 5});
  CHECK(noisy.returns == again.returns);
  CHECK(noisy.returns != clean.returns);
  CHECK_THROWS_AS(evaluate(policy, env, {0, 0.0, 5}), ConfigError);
  CHECK_THROWS_AS(evaluate(policy, env, {1, -0.1, 5}), ConfigError);
}

TEST_CASE("same config gives the same record") {
  const auto c = tiny_config();
  const auto a = train(c);
  const auto b = train(c);
  CHECK(record_to_json(a.record, false) == record_to_json(b.record, false));
  REQUIRE(a.record.curve.size() == 2);
  CHECK(a.record.curve[0].step == 250);
  REQUIRE(a.record.final_eval.has_value());
  CHECK(a.policy().stats.frozen());
  CHECK(a.record.config_hash == config_hash(c));

  auto c2 = c;
  c2.seed = 2;
  CHECK(record_to_json(train(c2).record, false) != record_to_json(a.record, false));
}

TEST_CASE("record JSON round trip") {
  const auto r = train(tiny_config()).record;
  const auto text = record_to_json(r);
  const auto back = record_from_json(text);
  CHECK(record_to_json(back) == text);
  CHECK_THROWS_AS(record_from_json("{"), FormatError);
  auto bad = r;
  bad.format_version = 99;
  CHECK_THROWS_AS(record_from_json(record_to_json(bad)), FormatError);
}

TEST_CASE("zero steps and reserved algorithms") {
  auto c = tiny_config();
  c.total_steps = 0;
  const auto r = train(c);
  CHECK(r.record.curve.empty());
  CHECK_FALSE(r.record.final_eval.has_value());
  CHECK(r.record.episodes == 0);

  c.total_steps = 10;
  c.algorithm = "ppo";
  CHECK_THROWS_AS(train(c), ConfigError);
}

TEST_CASE("baseline runs have no weightless policy") {
  auto c = tiny_config();
  c.model = "mlp";
  c.mlp_hidden = 8;
  c.total_steps = 300;
  const auto r = train(c);
  CHECK_THROWS_AS(r.policy(), StateError);
}

TEST_CASE("non-finite training aborts") {
  auto c = tiny_config();
  Exploding env;
  CHECK_THROWS_AS(train(c, env), NumericError);
}
