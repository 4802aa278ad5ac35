#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dwc/policy.hpp"

namespace dwc::testing {

inline RunningStats random_stats(int dim, std::mt19937_64& rng, bool frozen = true) {
  std::normal_distribution<double> mean(0.0, 2.0);
  std::uniform_real_distribution<double> sd(0.2, 3.0);
  std::vector<double> mu(static_cast<std::size_t>(dim));
  std::vector<double> m2(static_cast<std::size_t>(dim));
  const std::uint64_t count = 1000;
  for (int j = 0; j < dim; ++j) {
    mu[static_cast<std::size_t>(j)] = mean(rng);
    const double s = sd(rng);
    m2[static_cast<std::size_t>(j)] = s * s * static_cast<double>(count);
  }
  return RunningStats(count, mu, m2, frozen);
}

/// Random policy with random frozen statistics and random head parameters.
inline DwcPolicy random_policy(int obs, int act, int layers, int width, int arity, int bits,
                               std::uint64_t seed) {
  PolicyShape s;
  s.obs_dim = obs;
  s.act_dim = act;
  s.layers = layers;
  s.width = width;
  s.arity = arity;
  s.bits = bits;
  DwcPolicy p = init_policy(s, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  p.stats = random_stats(obs, rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& a : p.head.alpha_p) a = 1.5 * u(rng);
  for (auto& b : p.head.beta) b = 0.5 * u(rng);
  p.mode = PolicyMode::kHard;
  return p;
}

inline double rel_err(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace dwc::testing
