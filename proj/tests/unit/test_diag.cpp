#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "dwc/diag.hpp"
#include "dwc/env.hpp"
#include "dwc/policy.hpp"
#include "dwc/train.hpp"
#include "test_util.hpp"

using namespace dwc;

namespace {

// Points every first-layer slot at a chosen source.
void wire_first_layer(DwcPolicy& p, const std::vector<int>& sources) {
  auto& l = p.layers.front();
  auto logits = l.interconnect_logits();
  const auto in = static_cast<std::size_t>(l.in_width());
  REQUIRE(sources.size() * in == logits.size());
  for (std::size_t slot = 0; slot < sources.size(); ++slot) {
    for (std::size_t i = 0; i < in; ++i) logits[slot * in + i] = -1.0;
    logits[slot * in + static_cast<std::size_t>(sources[slot])] = 1.0;
  }
  l.refresh_selection();
}

DwcPolicy fresh(int obs, int width, int arity, int bits, std::uint64_t seed) {
  PolicyShape s;
  s.obs_dim = obs;
  s.act_dim = 1;
  s.layers = 1;
  s.width = width;
  s.arity = arity;
  s.bits = bits;
  return init_policy(s, seed);
}

}  // namespace

TEST_CASE("histograms of a hand-wired layer") {
  auto p = fresh(3, 2, 2, 5, 1);
  // sources are dimension * 5 + bit
  wire_first_layer(p, {0, 4, 10, 11});
  const auto h = input_connection_histogram(p);
  CHECK(h.counts == std::vector<std::int64_t>{2, 0, 2});
  CHECK(h.zero_dims == 1);
  CHECK(bit_index_histogram(p) == std::vector<std::int64_t>{2, 1, 0, 0, 1});
  CHECK(connections_csv(h) == "rank,dimension,connections\n0,0,2\n1,2,2\n2,1,0\n");
  CHECK(bits_csv(bit_index_histogram(p)) == "bit_index,connections\n0,2\n1,1\n2,0\n3,0\n4,1\n");
  CHECK(diag_filename("bits", "00ff") == "bits_00ff.csv");
}

TEST_CASE("histograms conserve the slot count") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto p = fresh(7, 30, 4, 9, seed);
    const auto h = input_connection_histogram(p);
    const auto b = bit_index_histogram(p);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::int64_t{0}) == 120);
    CHECK(std::accumulate(b.begin(), b.end(), std::int64_t{0}) == 120);
  }
}

TEST_CASE("untrained connections are uniform over dimensions") {
  // 8 dimensions, 7 degrees of freedom, 0.99 quantile.
  const double critical = 18.475;
  int rejections = 0;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    const auto p = fresh(8, 64, 6, 7, 100 + trial);
    const auto h = input_connection_histogram(p);
    const double expect = 64.0 * 6.0 / 8.0;
    double chi2 = 0.0;
    for (auto c : h.counts) chi2 += (c - expect) * (c - expect) / expect;
    if (chi2 > critical) ++rejections;
  }
  // Binomial(50, 0.01) exceeds 4 with probability below 0.002.
  CHECK(rejections <= 4);
}

TEST_CASE("connected-dimension count matches the occupancy formula") {
  CHECK(expected_connected_dims(1, 5) == 1.0);
  CHECK(expected_connected_dims(10, 0) == 0.0);
  CHECK(expected_connected_dims(4, 2) == doctest::Approx(4.0 * (1.0 - 0.5625)));
  const int trials = 300;
  double sum = 0.0, sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto p = fresh(40, 16, 3, 7, 1000 + static_cast<std::uint64_t>(t));
    const double connected = 40.0 - input_connection_histogram(p).zero_dims;
    sum += connected;
    sq += connected * connected;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sq / trials - mean * mean) / trials);
  CHECK(std::abs(mean - expected_connected_dims(40, 48)) < 4.0 * se + 1e-9);
}

TEST_CASE("noise sweep rows") {
  const auto p = dwc::testing::random_policy(3, 1, 2, 16, 4, 7, 4);
  PendulumEnv env;
  const std::vector<double> sigmas{0.0, 0.3};
  const auto rows = noise_sweep(p, env, sigmas, 2, 21);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].sigma == 0.0);
  const auto plain = evaluate(p, env, {2, 0.0, 21});
  CHECK(rows[0].mean == plain.mean);
  CHECK(rows[0].std == plain.std);
  CHECK(noise_sweep(p, env, sigmas, 2, 21)[1].mean == rows[1].mean);
  const auto csv = noise_csv(rows);
  CHECK(csv.rfind("sigma,mean,std\n0,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(default_noise_sigmas().size() == 5);
}
