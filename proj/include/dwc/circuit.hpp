#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dwc/policy.hpp"

namespace dwc {

/// Sensor interface of a compiled circuit: signed `bits`-wide words, where
/// word r stands for the real observation r * scale[j].
struct AdcSpec {
  int bits = 16;
  std::vector<double> scale;

  std::int64_t min_word() const { return -(std::int64_t{1} << (bits - 1)); }
  std::int64_t max_word() const { return (std::int64_t{1} << (bits - 1)) - 1; }
};

/// Per-dimension scale (|mean| + 10 * stddev) / max_word, so the clipped
/// normalized range fits the word width.
AdcSpec default_adc(const RunningStats& stats, int bits = 16);

inline constexpr int kDefaultOutFrac = 14;

/// Frozen, integer-only controller. Evaluation uses comparisons, table
/// lookups, popcounts and one table read per action.
struct CompiledCircuit {
  struct Layer {
    int in_width = 0;
    int width = 0;
    int arity = 0;
    std::vector<std::uint64_t> tables;    // one word per LUT, bit a = entry a
    std::vector<std::int32_t> selection;  // width x arity, slot 0 is the address LSB
  };

  int obs_dim = 0;
  int act_dim = 0;
  int bits = 0;       // thermometer bits per dimension
  int adc_bits = 16;
  int out_frac = kDefaultOutFrac;
  int group_size = 0;
  /// obs_dim x bits. Bit m of dimension j is (raw >= threshold); a value of
  /// max_word + 1 never fires.
  std::vector<std::int64_t> thresholds;
  std::vector<Layer> layers;
  /// act_dim x (group_size + 1): action word for each popcount.
  std::vector<std::int32_t> sram;
  /// Interface metadata only; circuit_eval never reads it.
  std::vector<double> adc_scale;

  int input_bits() const { return obs_dim * bits; }
  int final_width() const { return layers.empty() ? 0 : layers.back().width; }
  std::int64_t min_word() const { return -(std::int64_t{1} << (adc_bits - 1)); }
  std::int64_t max_word() const { return (std::int64_t{1} << (adc_bits - 1)) - 1; }
  std::span<const std::int32_t> action_table(int d) const {
    const auto n = static_cast<std::size_t>(group_size + 1);
    return std::span<const std::int32_t>(sram).subspan(static_cast<std::size_t>(d) * n, n);
  }

  /// Throws FormatError if the fields are inconsistent.
  void check() const;
};

/// Round-half-even onto signed fixed point with `frac` fractional bits,
/// saturated to int32.
std::int32_t quantize_action(double value, int frac);

/// entry[s] = quantize(squash(head_logit(s))) for s = 0..group_size.
std::vector<std::int32_t> build_action_table(const ActionHead& head, int d, int out_frac);

/// Real-valued thresholds mean_j + stddev_j * tau_m, obs_dim x bits.
std::vector<double> folded_thresholds(const DwcPolicy& policy);

/// Freezes `policy`. Integer thresholds reproduce the policy's own
/// normalize-and-compare on every ADC word exactly. Throws StateError unless
/// the statistics are frozen.
CompiledCircuit binarize(const DwcPolicy& policy, const AdcSpec& adc, int out_frac = kDefaultOutFrac);
CompiledCircuit binarize(const DwcPolicy& policy);

/// Thermometer bits for raw words (saturated to the ADC range).
std::vector<std::uint8_t> circuit_encode(const CompiledCircuit& circuit,
                                         std::span<const std::int64_t> raw);
/// Final-layer popcount of each action group.
std::vector<int> circuit_popcounts(const CompiledCircuit& circuit,
                                   std::span<const std::int64_t> raw);
/// Action words for raw ADC words. Out-of-range words saturate.
std::vector<std::int32_t> circuit_eval(const CompiledCircuit& circuit,
                                       std::span<const std::int64_t> raw);

/// The reference the circuit must match: raw words -> real observation ->
/// hard-mode policy_action -> quantize_action.
std::vector<std::int32_t> reference_action_words(const DwcPolicy& policy, const AdcSpec& adc,
                                                 std::span<const std::int64_t> raw,
                                                 int out_frac = kDefaultOutFrac);

/// Real observation for a raw word vector (no saturation).
std::vector<double> adc_to_real(const AdcSpec& adc, std::span<const std::int64_t> raw);

std::vector<std::uint8_t> serialize_circuit(const CompiledCircuit& circuit);
CompiledCircuit deserialize_circuit(std::span<const std::uint8_t> bytes);
void save_circuit(const CompiledCircuit& circuit, const std::string& path);
CompiledCircuit load_circuit(const std::string& path);

}  // namespace dwc
