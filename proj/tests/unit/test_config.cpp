#include <doctest.h>

#include <string>

#include "dwc/config.hpp"
#include "dwc/errors.hpp"

using namespace dwc;

namespace {

std::string error_of(const RunConfig& c) {
  try {
    c.validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("parses key = value text with comments") {
  const auto c = parse_config(
      "# pendulum run\n"
      "env = pendulum\n"
      "total_steps = 1200   # short\n"
      "\n"
      "width=64\n"
      "trainable_interconnect = true, false\n"
      "gradient = efd\n"
      "policy_lr = 1e-3\n");
  CHECK(c.env == "pendulum");
  CHECK(c.total_steps == 1200);
  CHECK(c.width == 64);
  CHECK(c.trainable_interconnect == std::vector<bool>{true, false});
  CHECK(c.gradient == GradientMode::kEfd);
  CHECK(c.sac.policy_lr == 1e-3);
  CHECK(error_of(c).empty());
}

TEST_CASE("missing required fields are named") {
  RunConfig c;
  CHECK(error_of(c).find("env") != std::string::npos);
  c.env = "pendulum";
  CHECK(error_of(c).find("total_steps") != std::string::npos);
  c.total_steps = 10;
  CHECK(error_of(c).empty());
  c.model = "cnn";
  CHECK(error_of(c).find("model") != std::string::npos);
}

TEST_CASE("malformed input") {
  CHECK_THROWS_AS(parse_config("width = wide\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("colour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("preset = nope\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("autotune = maybe\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("preset applies first, explicit keys override it") {
  const auto c = parse_config("width = 32\npreset = pendulum-sac\n");
  CHECK(c.env == "pendulum");
  CHECK(c.bits == 31);
  CHECK(c.alpha_p_init == -1.0);
  CHECK(c.width == 32);
  CHECK(c.preset == "pendulum-sac");
}

TEST_CASE("every shipped preset parses") {
  for (const auto& name : preset_names()) {
    RunConfig c;
    CHECK_NOTHROW(apply_preset(c, name));
  }
  RunConfig p;
  apply_preset(p, "full-sac");
  CHECK(p.width == 1024);
  CHECK(p.arity == 6);
  CHECK(p.bits == 63);
  CHECK(p.layers == 2);
  CHECK(p.sac.batch_size == 256);
  CHECK(p.sac.q_lr == 1e-3);
}

TEST_CASE("canonical text round-trips and hashing ignores output_dir") {
  auto c = parse_config("preset = pendulum-sac\nseed = 4\n");
  const auto again = parse_config(to_text(c));
  CHECK(to_text(again) == to_text(c));
  CHECK(config_hash(again) == config_hash(c));
  auto moved = c;
  moved.output_dir = "/elsewhere";
  CHECK(config_hash(moved) == config_hash(c));
  auto reseeded = c;
  reseeded.seed = 5;
  CHECK(config_hash(reseeded) != config_hash(c));
  CHECK(config_hash(c).size() == 16);
}

TEST_CASE("FNV-1a reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}
