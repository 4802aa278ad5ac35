#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dwc {

/// Observations are clipped to this symmetric interval after normalization.
inline constexpr double kClipBound = 10.0;

/// Lower bound applied to per-dimension standard deviations.
inline constexpr double kSigmaFloor = 1e-8;

/// Quantile function of the standard normal distribution.
/// Throws DomainError unless 0 < p < 1.
double inverse_normal_cdf(double p);

/// Standard normal CDF, evaluated through std::erfc.
double normal_cdf(double z);

/// Running mean / variance (Welford) over observation vectors.
///
/// Statistics update only while training rollouts run; freeze() pins them for
/// evaluation and compilation.
class RunningStats {
 public:
  RunningStats() = default;
  explicit RunningStats(std::size_t dim);

  /// Restores a previously serialized state.
  RunningStats(std::uint64_t count, std::vector<double> mean,
               std::vector<double> m2, bool frozen);

  void update(std::span<const double> obs);
  void freeze() { frozen_ = true; }
  void unfreeze() { frozen_ = false; }

  std::size_t dim() const { return mean_.size(); }
  std::uint64_t count() const { return count_; }
  bool frozen() const { return frozen_; }
  bool usable() const { return count_ >= 2; }

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& m2() const { return m2_; }

  /// Population variance m2/count of dimension j.
  double variance(std::size_t j) const;
  /// max(sqrt(variance), kSigmaFloor).
  double stddev(std::size_t j) const;

 private:
  std::uint64_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
  bool frozen_ = false;
};

/// Shared thermometer thresholds; the same vector applies to every dimension.
struct ThermometerSpec {
  int bits = 0;
  std::vector<double> thresholds;
  double clip_lo = -kClipBound;
  double clip_hi = kClipBound;
};

/// Thresholds at stretched Gaussian quantiles m/B (m = 1..B-1) plus 1/2,
/// scaled so that the outermost land on +-10. B must be odd and >= 3.
ThermometerSpec compute_thresholds(int bits);

/// clip((x - mean) / stddev, -10, 10) per dimension.
/// Throws StateError when fewer than two samples were seen.
std::vector<double> normalize_clip(std::span<const double> obs,
                                   const RunningStats& stats);

/// Single-dimension normalization, the exact arithmetic used by
/// normalize_clip. Exposed so compile-time folding reproduces it bit-for-bit.
double normalize_clip_one(double x, double mean, double stddev);

/// Thermometer code of one clipped value: out[m] = (x >= thresholds[m]).
void encode_value(double x, const ThermometerSpec& spec,
                  std::span<std::uint8_t> out);

/// Concatenated per-dimension thermometer blocks, dimension order.
std::vector<std::uint8_t> encode(std::span<const double> normalized,
                                 const ThermometerSpec& spec);

/// Number of ones a clipped value produces (its thermometer level).
int thermometer_level(double x, const ThermometerSpec& spec);

}  // namespace dwc
