#include "dwc/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dwc/errors.hpp"

namespace dwc {

namespace {

// Acklam's rational approximation, relative error ~1e-9 before refinement.
double acklam(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Lower-half quantile (p <= 1/2) with one Halley refinement step.
double lower_quantile(double p) {
  double z = acklam(p);
  const double e = normal_cdf(z) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * z * z);
  z = z - u / (1.0 + 0.5 * z * u);
  return z;
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("inverse_normal_cdf: p must lie in (0, 1), got " +
                      std::to_string(p));
  }
  if (p == 0.5) return 0.0;
  // Evaluate on the lower half only so the result is antisymmetric.
  if (p > 0.5) return -lower_quantile(1.0 - p);
  return lower_quantile(p);
}

RunningStats::RunningStats(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}

RunningStats::RunningStats(std::uint64_t count, std::vector<double> mean,
                           std::vector<double> m2, bool frozen)
    : count_(count), mean_(std::move(mean)), m2_(std::move(m2)), frozen_(frozen) {
  if (mean_.size() != m2_.size()) {
    throw ShapeError("RunningStats: mean and m2 lengths differ");
  }
}

void RunningStats::update(std::span<const double> obs) {
  if (frozen_) throw StateError("RunningStats: statistics are frozen");
  if (obs.size() != mean_.size()) {
    throw ShapeError("RunningStats: expected " + std::to_string(mean_.size()) +
                     " dimensions, got " + std::to_string(obs.size()));
  }
  ++count_;
  const double n = static_cast<double>(count_);
  for (std::size_t j = 0; j < obs.size(); ++j) {
    const double delta = obs[j] - mean_[j];
    mean_[j] += delta / n;
    m2_[j] += delta * (obs[j] - mean_[j]);
  }
}

double RunningStats::variance(std::size_t j) const {
  if (count_ == 0) return 0.0;
  return std::max(0.0, m2_[j] / static_cast<double>(count_));
}

double RunningStats::stddev(std::size_t j) const {
  return std::max(std::sqrt(variance(j)), kSigmaFloor);
}

ThermometerSpec compute_thresholds(int bits) {
  if (bits < 3 || bits % 2 == 0) {
    throw ConfigError("thermometer bits must be odd and >= 3, got " +
                      std::to_string(bits));
  }
  std::vector<double> quantiles;
  quantiles.reserve(static_cast<std::size_t>(bits));
  for (int m = 1; m < bits; ++m) quantiles.push_back(double(m) / double(bits));
  quantiles.push_back(0.5);
  std::sort(quantiles.begin(), quantiles.end());

  const double stretch = kClipBound / std::abs(inverse_normal_cdf(1.0 / bits));

  ThermometerSpec spec;
  spec.bits = bits;
  spec.thresholds.reserve(quantiles.size());
  for (double q : quantiles) spec.thresholds.push_back(stretch * inverse_normal_cdf(q));
  spec.thresholds.front() = -kClipBound;
  spec.thresholds.back() = kClipBound;
  spec.thresholds[static_cast<std::size_t>(bits / 2)] = 0.0;
  return spec;
}

double normalize_clip_one(double x, double mean, double stddev) {
  return std::clamp((x - mean) / stddev, -kClipBound, kClipBound);
}

std::vector<double> normalize_clip(std::span<const double> obs,
                                   const RunningStats& stats) {
  if (!stats.usable()) {
    throw StateError("normalize_clip: need at least two samples, have " +
                     std::to_string(stats.count()));
  }
  if (obs.size() != stats.dim()) {
    throw ShapeError("normalize_clip: expected " + std::to_string(stats.dim()) +
                     " dimensions, got " + std::to_string(obs.size()));
  }
  std::vector<double> out(obs.size());
  for (std::size_t j = 0; j < obs.size(); ++j) {
    out[j] = normalize_clip_one(obs[j], stats.mean()[j], stats.stddev(j));
  }
  return out;
}

void encode_value(double x, const ThermometerSpec& spec, std::span<std::uint8_t> out) {
  for (std::size_t m = 0; m < spec.thresholds.size(); ++m) {
    out[m] = x >= spec.thresholds[m] ? 1 : 0;
  }
}

std::vector<std::uint8_t> encode(std::span<const double> normalized,
                                 const ThermometerSpec& spec) {
  const auto b = static_cast<std::size_t>(spec.bits);
  std::vector<std::uint8_t> code(normalized.size() * b);
  for (std::size_t j = 0; j < normalized.size(); ++j) {
    encode_value(normalized[j], spec, std::span(code).subspan(j * b, b));
  }
  return code;
}

int thermometer_level(double x, const ThermometerSpec& spec) {
  // Thresholds ascend, so the level is the count of thresholds <= x.
  return static_cast<int>(std::upper_bound(spec.thresholds.begin(),
                                           spec.thresholds.end(), x) -
                          spec.thresholds.begin());
}

}  // namespace dwc
