#include <doctest.h>

#include <cmath>
#include <random>

#include "dwc/errors.hpp"
#include "dwc/lut_layer.hpp"
#include "test_util.hpp"

using namespace dwc;
using dwc::testing::rel_err;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

LutLayer random_layer(int in_w, int width, int k, std::uint64_t seed, bool trainable = true) {
  LutLayer layer(in_w, width, k, trainable);
  std::mt19937_64 rng(seed);
  layer.randomize(rng);
  return layer;
}

// Brute force over all addresses: E[out_i] = sum_a P(a) sigmoid(T_ia), with
// P(a) = prod_j (a_j ? p_j : 1 - p_j).
double oracle_out(const LutLayer& l, int i, const double* x) {
  double out = 0.0;
  for (std::uint32_t a = 0; a < static_cast<std::uint32_t>(l.table_size()); ++a) {
    double pa = 1.0;
    for (int j = 0; j < l.arity(); ++j) {
      const double p = x[l.selected(i, j)];
      pa *= (a >> j) & 1u ? p : 1.0 - p;
    }
    out += pa * sig(l.table_logits()[static_cast<std::size_t>(i * l.table_size()) + a]);
  }
  return out;
}

// d E[out_i] / d p_slot, the slot taken as an independent variable.
double oracle_slot(const LutLayer& l, int i, int slot, const double* x) {
  double d = 0.0;
  for (std::uint32_t a = 0; a < static_cast<std::uint32_t>(l.table_size()); ++a) {
    double pa = 1.0;
    for (int j = 0; j < l.arity(); ++j) {
      if (j == slot) continue;
      const double p = x[l.selected(i, j)];
      pa *= (a >> j) & 1u ? p : 1.0 - p;
    }
    const double sign = (a >> slot) & 1u ? 1.0 : -1.0;
    d += sign * pa * sig(l.table_logits()[static_cast<std::size_t>(i * l.table_size()) + a]);
  }
  return d;
}

std::vector<double> random_probs(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double weighted(std::span<const double> out, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t n = 0; n < out.size(); ++n) s += out[n] * w[n];
  return s;
}

}  // namespace

TEST_CASE("addresses are LSB-first") {
  const std::uint8_t bits[] = {1, 0, 1};
  CHECK(addr(bits) == 5u);
  const std::uint8_t one[] = {0, 0, 0, 0, 0, 1};
  CHECK(addr(one) == 32u);
}

TEST_CASE("randomize draws in range and selections are argmax with low ties") {
  auto l = random_layer(40, 16, 4, 1);
  for (double v : l.table_logits()) CHECK((v >= -1.0 && v < 1.0));
  for (double v : l.interconnect_logits()) CHECK((v >= 0.0 && v < 1.0));
  for (int i = 0; i < l.width(); ++i) {
    for (int j = 0; j < l.arity(); ++j) {
      const auto row = l.interconnect_logits().subspan(
          static_cast<std::size_t>((i * l.arity() + j) * l.in_width()),
          static_cast<std::size_t>(l.in_width()));
      const int s = l.selected(i, j);
      for (int c = 0; c < l.in_width(); ++c) CHECK(row[static_cast<std::size_t>(c)] <= row[static_cast<std::size_t>(s)]);
    }
  }
  LutLayer tie(5, 1, 2, true);
  for (auto& v : tie.interconnect_logits()) v = 0.25;
  tie.refresh_selection();
  CHECK(tie.selected(0, 0) == 0);
  CHECK(tie.selected(0, 1) == 0);
}

TEST_CASE("hard forward is a table lookup at the selected address") {
  LutLayer l(4, 1, 2, false);
  // slot 0 reads bit 2, slot 1 reads bit 0; table is x0 AND NOT x1 on (slot0, slot1).
  auto ic = l.interconnect_logits();
  ic[2] = 1.0;
  ic[4 + 0] = 1.0;
  l.refresh_selection();
  auto t = l.table_logits();
  t[0] = -1; t[1] = 1; t[2] = -1; t[3] = -1;
  const std::uint8_t a[] = {0, 0, 1, 0};
  const std::uint8_t b[] = {1, 0, 1, 0};
  CHECK(hard_forward(l, a)[0] == 1);
  CHECK(hard_forward(l, b)[0] == 0);
  CHECK(l.table_bit(0, 1));
  t[0] = 0.0;
  CHECK(l.table_bit(0, 0));  // logit >= 0 binarizes to 1
}

TEST_CASE("relaxed forward equals the brute-force expectation") {
  std::mt19937_64 rng(11);
  for (int k : {2, 3, 6}) {
    auto l = random_layer(20, 12, k, 100 + k);
    const std::size_t batch = 37;
    const auto x = random_probs(batch * 20, rng);
    const auto y = relaxed_forward(l, x, batch);
    for (std::size_t b = 0; b < batch; ++b) {
      for (int i = 0; i < 12; ++i) {
        CHECK(y[b * 12 + static_cast<std::size_t>(i)] ==
              doctest::Approx(oracle_out(l, i, x.data() + b * 20)).epsilon(1e-12));
      }
    }
    // The single-sample path agrees with the batched one.
    const auto y0 = relaxed_forward(l, std::span(x).subspan(0, 20), 1);
    for (int i = 0; i < 12; ++i) CHECK(y0[static_cast<std::size_t>(i)] == doctest::Approx(y[static_cast<std::size_t>(i)]).epsilon(1e-14));
  }
}

TEST_CASE("relaxed forward on binary inputs matches sigmoid of the looked-up entry") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.5);
  for (int k : {2, 6}) {
    auto l = random_layer(30, 64, k, 7 + k);
    for (int t = 0; t < 50; ++t) {
      std::vector<std::uint8_t> bits(30);
      std::vector<double> probs(30);
      for (std::size_t n = 0; n < 30; ++n) probs[n] = bits[n] = coin(rng) ? 1 : 0;
      const auto hard = hard_forward(l, bits);
      const auto soft = relaxed_forward(l, probs);
      for (int i = 0; i < 64; ++i) {
        CHECK((soft[static_cast<std::size_t>(i)] >= 0.5) == (hard[static_cast<std::size_t>(i)] == 1));
      }
    }
  }
}

TEST_CASE("table and input gradients match central differences") {
  std::mt19937_64 rng(21);
  for (int k : {2, 4, 6}) {
    auto l = random_layer(16, 8, k, 40 + k);
    const std::size_t batch = 21;
    auto x = random_probs(batch * 16, rng);
    for (auto& v : x) v = 0.05 + 0.9 * v;
    const auto w = random_probs(batch * 8, rng);
    LayerCache cache;
    relaxed_forward(l, x, batch, GradientMode::kExpectation, &cache);
    const auto g = backward(l, cache, w, true);
    const double h = 1e-5;

    auto t = l.table_logits();
    for (std::size_t n = 0; n < t.size(); n += 3) {
      const double keep = t[n];
      t[n] = keep + h;
      const double up = weighted(relaxed_forward(l, x, batch), w);
      t[n] = keep - h;
      const double dn = weighted(relaxed_forward(l, x, batch), w);
      t[n] = keep;
      CHECK(rel_err(g.table[n], (up - dn) / (2 * h)) < 1e-5);
    }
    for (std::size_t n = 0; n < x.size(); n += 5) {
      const double keep = x[n];
      x[n] = keep + h;
      const double up = weighted(relaxed_forward(l, x, batch), w);
      x[n] = keep - h;
      const double dn = weighted(relaxed_forward(l, x, batch), w);
      x[n] = keep;
      CHECK(rel_err(g.input[n], (up - dn) / (2 * h)) < 1e-5);
    }
  }
}

TEST_CASE("interconnect gradient is the softmax straight-through estimate") {
  std::mt19937_64 rng(3);
  const int in_w = 9, width = 4, k = 3;
  auto l = random_layer(in_w, width, k, 77);
  const std::size_t batch = 6;
  const auto x = random_probs(batch * in_w, rng);
  const auto w = random_probs(batch * width, rng);
  LayerCache cache;
  relaxed_forward(l, x, batch, GradientMode::kExpectation, &cache);
  const auto g = backward(l, cache, w, false);
  REQUIRE(g.interconnect.size() == static_cast<std::size_t>(width * k * in_w));
  CHECK(g.input.empty());

  // dW[r,c] = sum_b g_rb * S_rc * (x_bc - sum_c' S_rc' x_bc').
  for (int i = 0; i < width; ++i) {
    for (int j = 0; j < k; ++j) {
      const auto row = static_cast<std::size_t>(i * k + j);
      const double* logits = l.interconnect_logits().data() + row * in_w;
      std::vector<double> s(in_w);
      double z = 0.0;
      for (int c = 0; c < in_w; ++c) z += (s[c] = std::exp(logits[c]));
      for (auto& v : s) v /= z;
      for (int c = 0; c < in_w; ++c) {
        double expect = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
          const double* xb = x.data() + b * in_w;
          double mix = 0.0;
          for (int c2 = 0; c2 < in_w; ++c2) mix += s[c2] * xb[c2];
          const double gslot = w[b * width + i] * oracle_slot(l, i, j, xb);
          expect += gslot * s[c] * (xb[c] - mix);
        }
        CHECK(g.interconnect[row * in_w + c] == doctest::Approx(expect).epsilon(1e-10));
      }
    }
  }

  auto frozen = random_layer(in_w, width, k, 77, false);
  LayerCache c2;
  relaxed_forward(frozen, x, batch, GradientMode::kExpectation, &c2);
  CHECK(backward(frozen, c2, w, false).interconnect.empty());
}

TEST_CASE("EFD backend: hard forward, straight-through table gradient") {
  LutLayer l(2, 1, 2, false);
  auto ic = l.interconnect_logits();
  ic[0] = 1.0;      // slot 0 <- bit 0
  ic[2 + 1] = 1.0;  // slot 1 <- bit 1
  l.refresh_selection();
  auto t = l.table_logits();
  // Table = slot 0 (identity on the address LSB).
  t[0] = -1; t[1] = 1; t[2] = -1; t[3] = 1;
  const std::vector<double> x{0.8, 0.1};
  LayerCache cache;
  const auto y = relaxed_forward(l, x, 1, GradientMode::kEfd, &cache);
  CHECK(y[0] == 1.0);
  const std::vector<double> up{2.0};
  const auto g = backward(l, cache, up, true);
  CHECK(g.table[1] == 2.0);
  CHECK(g.table[0] == 0.0);
  // Address 1, ones at t=1 and t=3. Slot 0: +1/(0+1) + 1/(1+1) = 1.5.
  // Slot 1: t=1 has bit 1 clear (-1), t=3 has it set (+1), both at distance 0.
  CHECK(g.input[0] == doctest::Approx(2.0 * 1.5));
  CHECK(g.input[1] == doctest::Approx(0.0));
}

TEST_CASE("layer input validation") {
  auto l = random_layer(4, 2, 2, 1);
  CHECK_THROWS_AS(relaxed_forward(l, std::vector<double>{0, 0.5, 1.2, 0}), DomainError);
  CHECK_THROWS_AS(relaxed_forward(l, std::vector<double>{0, 0.5}), ShapeError);
  CHECK_THROWS_AS(LutLayer(4, 2, 7, true), ConfigError);
  CHECK_THROWS_AS(LutLayer(4, 2, 1, true), ConfigError);
  LayerCache empty;
  CHECK_THROWS_AS(backward(l, empty, std::vector<double>{1, 1}, false), StateError);
}
