#include <doctest.h>

#include <random>

#include "dwc/encoding.hpp"
#include "dwc/errors.hpp"

using namespace dwc;

TEST_CASE("inverse normal cdf against tabulated quantiles") {
  CHECK(inverse_normal_cdf(0.5) == 0.0);
  CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(inverse_normal_cdf(0.9) == doctest::Approx(1.2815515655446004).epsilon(1e-12));
  CHECK(inverse_normal_cdf(1e-6) == doctest::Approx(-4.753424308822899).epsilon(1e-11));
  CHECK(inverse_normal_cdf(0.3) == doctest::Approx(-inverse_normal_cdf(0.7)).epsilon(1e-14));
  CHECK_THROWS_AS(inverse_normal_cdf(0.0), DomainError);
  CHECK_THROWS_AS(inverse_normal_cdf(1.0), DomainError);
}

TEST_CASE("inverse normal cdf inverts the erfc-based cdf") {
  for (double p = 1e-4; p < 1.0; p += 0.0137) {
    CHECK(normal_cdf(inverse_normal_cdf(p)) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("63-bit thresholds reproduce the published ticks") {
  const double ticks[] = {-10.0000, -8.6410, -7.7687, -7.1061, -6.5625, -6.0960, -5.6838,
                          -5.3118,  -4.9710, -4.6549, -4.3590, -4.0796, -3.8143, -3.5608,
                          -3.3174,  -3.0828, -2.8557, -2.6353, -2.4206, -2.2109, -2.0056,
                          -1.8042,  -1.6061, -1.4108, -1.2180, -1.0272, -0.8382, -0.6505,
                          -0.4639,  -0.2781, -0.0926, 0.0};
  const auto spec = compute_thresholds(63);
  REQUIRE(spec.thresholds.size() == 63);
  for (int i = 0; i < 32; ++i) {
    CHECK(std::abs(spec.thresholds[static_cast<std::size_t>(i)] - ticks[i]) <= 5e-3);
    CHECK(std::abs(spec.thresholds[static_cast<std::size_t>(62 - i)] + ticks[i]) <= 5e-3);
  }
}

TEST_CASE("thresholds sit at stretched quantiles") {
  for (int b : {3, 5, 15, 31, 63, 127, 255}) {
    const auto spec = compute_thresholds(b);
    REQUIRE(spec.thresholds.size() == static_cast<std::size_t>(b));
    CHECK(spec.thresholds.front() == -10.0);
    CHECK(spec.thresholds.back() == 10.0);
    CHECK(spec.thresholds[static_cast<std::size_t>(b / 2)] == 0.0);
    // Interior points map back to their quantiles through the cdf.
    const double s = 10.0 / std::abs(inverse_normal_cdf(1.0 / b));
    std::vector<double> q;
    for (int m = 1; m < b; ++m) q.push_back(double(m) / b);
    q.push_back(0.5);
    std::sort(q.begin(), q.end());
    for (std::size_t i = 1; i + 1 < q.size(); ++i) {
      if (i == static_cast<std::size_t>(b / 2)) continue;
      CHECK(normal_cdf(spec.thresholds[i] / s) == doctest::Approx(q[i]).epsilon(1e-10));
    }
    for (std::size_t i = 1; i < spec.thresholds.size(); ++i) {
      CHECK(spec.thresholds[i] > spec.thresholds[i - 1]);
    }
  }
}

TEST_CASE("threshold bit counts must be odd and at least three") {
  CHECK_THROWS_AS(compute_thresholds(4), ConfigError);
  CHECK_THROWS_AS(compute_thresholds(1), ConfigError);
  CHECK_THROWS_AS(compute_thresholds(-3), ConfigError);
}

TEST_CASE("normalize and clip") {
  RunningStats unit(2, {0.0}, {2.0}, true);
  CHECK(normalize_clip(std::vector<double>{37.0}, unit)[0] == 10.0);
  RunningStats wide(4, {0.0}, {16.0}, true);  // variance 4
  CHECK(normalize_clip(std::vector<double>{-30.0}, wide)[0] == -10.0);
  CHECK(normalize_clip(std::vector<double>{3.0}, wide)[0] == 1.5);
  RunningStats empty(1);
  CHECK_THROWS_AS(normalize_clip(std::vector<double>{1.0}, empty), StateError);
}

TEST_CASE("running statistics match a two-pass computation") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(3.0, 2.0);
  RunningStats stats(3);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 500; ++i) {
    std::vector<double> x{n(rng), 10 * n(rng), -n(rng)};
    stats.update(x);
    rows.push_back(x);
  }
  for (std::size_t j = 0; j < 3; ++j) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r[j];
    mean /= rows.size();
    double var = 0.0;
    for (const auto& r : rows) var += (r[j] - mean) * (r[j] - mean);
    var /= rows.size();
    CHECK(stats.mean()[j] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(stats.variance(j) == doctest::Approx(var).epsilon(1e-10));
  }
  stats.freeze();
  CHECK_THROWS_AS(stats.update(std::vector<double>{0, 0, 0}), StateError);
}

TEST_CASE("constant dimensions use the sigma floor") {
  RunningStats s(1);
  s.update(std::vector<double>{2.0});
  s.update(std::vector<double>{2.0});
  CHECK(s.stddev(0) == kSigmaFloor);
  CHECK(normalize_clip(std::vector<double>{2.0}, s)[0] == 0.0);
}

TEST_CASE("thermometer code is a prefix of ones and monotone") {
  const auto spec = compute_thresholds(15);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-12.0, 12.0);
  for (int t = 0; t < 2000; ++t) {
    const double a = std::clamp(u(rng), -10.0, 10.0);
    const double b = std::clamp(u(rng), -10.0, 10.0);
    const auto ca = encode(std::vector<double>{a}, spec);
    int level = 0;
    while (level < 15 && ca[static_cast<std::size_t>(level)]) ++level;
    for (int m = level; m < 15; ++m) CHECK(ca[static_cast<std::size_t>(m)] == 0);
    CHECK(level == thermometer_level(a, spec));
    if (a <= b) CHECK(thermometer_level(a, spec) <= thermometer_level(b, spec));
  }
  CHECK(thermometer_level(-10.0, spec) == 1);  // bit 0 always fires
  CHECK(thermometer_level(10.0, spec) == 15);
  CHECK(thermometer_level(0.0, spec) == 8);
}
