#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "dwc/circuit.hpp"
#include "dwc/errors.hpp"
#include "dwc/policy.hpp"
#include "test_util.hpp"

using namespace dwc;

namespace {

// Round half to even without the floating-point environment.
std::int64_t ref_round(double v) {
  const double f = std::floor(v);
  const double diff = v - f;
  auto i = static_cast<std::int64_t>(f);
  if (diff > 0.5) return i + 1;
  if (diff < 0.5) return i;
  return (i % 2 == 0) ? i : i + 1;
}

std::vector<std::int64_t> random_words(const CompiledCircuit& c, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> w(c.min_word(), c.max_word());
  std::vector<std::int64_t> raw(static_cast<std::size_t>(c.obs_dim));
  for (auto& r : raw) r = w(rng);
  return raw;
}

}  // namespace

TEST_CASE("action quantizer") {
  CHECK(quantize_action(0.0, 14) == 0);
  CHECK(quantize_action(1.0, 14) == 16384);
  CHECK(quantize_action(-1.0, 14) == -16384);
  CHECK(quantize_action(0.5 / 16384.0, 14) == 0);
  CHECK(quantize_action(1.5 / 16384.0, 14) == 2);
  CHECK(quantize_action(-2.5 / 16384.0, 14) == -2);
  CHECK(quantize_action(1e12, 14) == std::numeric_limits<std::int32_t>::max());
  CHECK(quantize_action(-1e12, 14) == std::numeric_limits<std::int32_t>::min());
  CHECK_THROWS_AS(quantize_action(std::nan(""), 14), NumericError);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    double v = u(rng);
    if (i % 4 == 0) v = (std::floor(v * 65536.0) + 0.5) / 65536.0;  // exact ties
    CHECK(quantize_action(v, 16) == ref_round(std::ldexp(v, 16)));
  }
}

TEST_CASE("action table shape") {
  ActionHead h{1, 8, {0.0}, {0.0}, Squash::kTanh};
  const auto t = build_action_table(h, 0, 14);
  REQUIRE(t.size() == 9);
  CHECK(t[4] == 0);
  CHECK(t[0] == -t[8]);
  CHECK(t[8] == quantize_action(std::tanh(0.5), 14));
  for (std::size_t s = 1; s < t.size(); ++s) CHECK(t[s] >= t[s - 1]);
}

TEST_CASE("exhaustive parity with one observation and 15 bits") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto p = dwc::testing::random_policy(1, 1, 2, 16, 4, 15, seed);
    const auto adc = default_adc(p.stats);
    const auto c = binarize(p, adc);
    for (std::int64_t r = c.min_word(); r <= c.max_word(); ++r) {
      const std::vector<std::int64_t> raw{r};
      REQUIRE(circuit_eval(c, raw) == reference_action_words(p, adc, raw));
    }
  }
}

TEST_CASE("random parity on multi-dimensional policies") {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto p = dwc::testing::random_policy(4, 2, 2, 40, 6, 31, seed);
    const auto adc = default_adc(p.stats, 12);
    const auto c = binarize(p, adc);
    for (int i = 0; i < 2000; ++i) {
      const auto raw = random_words(c, rng);
      REQUIRE(circuit_eval(c, raw) == reference_action_words(p, adc, raw));
    }
  }
}

TEST_CASE("out-of-range words saturate") {
  const auto p = dwc::testing::random_policy(2, 1, 2, 16, 4, 15, 2);
  const auto c = binarize(p);
  const std::vector<std::int64_t> big{c.max_word() + 1000, c.min_word() - 5};
  const std::vector<std::int64_t> edge{c.max_word(), c.min_word()};
  CHECK(circuit_eval(c, big) == circuit_eval(c, edge));
  CHECK(circuit_encode(c, big) == circuit_encode(c, edge));
}

TEST_CASE("all-zero tables give a constant circuit") {
  auto p = dwc::testing::random_policy(3, 2, 2, 20, 3, 7, 5);
  for (auto& l : p.layers) {
    for (auto& v : l.table_logits()) v = -4.0;
  }
  const auto c = binarize(p);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto raw = random_words(c, rng);
    CHECK(circuit_popcounts(c, raw) == std::vector<int>{0, 0});
    const auto y = circuit_eval(c, raw);
    CHECK(y[0] == c.action_table(0)[0]);
    CHECK(y[1] == c.action_table(1)[0]);
  }
}

TEST_CASE("identity statistics fold thresholds onto the quantiles") {
  auto p = dwc::testing::random_policy(2, 1, 1, 8, 3, 15, 3);
  p.stats = RunningStats(100, {0.0, 0.0}, {100.0, 100.0}, true);
  const auto folded = folded_thresholds(p);
  for (int j = 0; j < 2; ++j) {
    for (int m = 0; m < 15; ++m) {
      CHECK(folded[static_cast<std::size_t>(j * 15 + m)] ==
            doctest::Approx(p.thresholds.thresholds[static_cast<std::size_t>(m)]));
    }
  }
  AdcSpec adc;
  adc.bits = 16;
  adc.scale = {1.0 / 1024.0, 1.0 / 1024.0};
  const auto c = binarize(p, adc);
  CHECK(c.thresholds[0] == c.min_word());  // the lowest quantile always fires
  for (int m = 1; m < 15; ++m) {
    const double tau = p.thresholds.thresholds[static_cast<std::size_t>(m)];
    CHECK(c.thresholds[static_cast<std::size_t>(m)] ==
          static_cast<std::int64_t>(std::ceil(tau * 1024.0)));
  }
  // With a +-5 range the top quantile (+10) can never fire.
  adc.scale = {10.0 / 65536.0, 10.0 / 65536.0};
  CHECK(binarize(p, adc).thresholds[14] == 32768);
}

TEST_CASE("unfrozen statistics are rejected") {
  auto p = dwc::testing::random_policy(2, 1, 1, 8, 3, 7, 1);
  p.stats.unfreeze();
  CHECK_THROWS_AS(binarize(p), StateError);
}

TEST_CASE("serialization round trip") {
  const auto p = dwc::testing::random_policy(3, 2, 2, 24, 5, 15, 9);
  const auto c = binarize(p);
  const auto bytes = serialize_circuit(c);
  const auto back = deserialize_circuit(bytes);
  CHECK(serialize_circuit(back) == bytes);
  CHECK(back.sram == c.sram);
  CHECK(back.thresholds == c.thresholds);
  CHECK(serialize_circuit(binarize(p)) == bytes);
  const std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 9);
  CHECK_THROWS_AS(deserialize_circuit(cut), FormatError);
}
