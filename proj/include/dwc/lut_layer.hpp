#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dwc {

inline constexpr int kMinArity = 2;
inline constexpr int kMaxArity = 6;

/// How LUT layers are differentiated during training.
///
/// kExpectation: forward is the exact expectation of each LUT output under
/// independent Bernoulli inputs, backward is its exact gradient.
/// kEfd: forward is the hard lookup, backward uses an extended
/// finite-difference surrogate weighted by 1/(Hamming distance + 1).
enum class GradientMode { kExpectation, kEfd };

/// Integer address of a k-bit LUT input; bits[0] is the least significant.
std::uint32_t addr(std::span<const std::uint8_t> bits);

/// One layer of k-input lookup tables with a learnable interconnect.
///
/// table_logits is width x 2^k (row per LUT). interconnect_logits is
/// width x k x in_width; the hard selection of each input slot is the argmax
/// over its in_width candidates, ties to the lowest index.
class LutLayer {
 public:
  LutLayer() = default;
  LutLayer(int in_width, int width, int arity, bool trainable_interconnect);

  int in_width() const { return in_width_; }
  int width() const { return width_; }
  int arity() const { return arity_; }
  int table_size() const { return 1 << arity_; }
  bool trainable_interconnect() const { return trainable_interconnect_; }

  std::span<double> table_logits() { return table_logits_; }
  std::span<const double> table_logits() const { return table_logits_; }
  std::span<double> interconnect_logits() { return interconnect_logits_; }
  std::span<const double> interconnect_logits() const { return interconnect_logits_; }

  /// Argmax selections, width x k. Valid after refresh_selection().
  const std::vector<int>& selection() const { return selection_; }
  int selected(int lut, int slot) const {
    return selection_[static_cast<std::size_t>(lut * arity_ + slot)];
  }

  /// Recomputes the argmax selections from interconnect_logits.
  void refresh_selection();

  /// Binarized table entry: logit >= 0.
  bool table_bit(int lut, std::uint32_t address) const {
    return table_logits_[static_cast<std::size_t>(lut) * table_size() + address] >= 0.0;
  }

  /// Table logits ~ U(-1, 1), interconnect logits ~ U(0, 1).
  void randomize(std::mt19937_64& rng);

 private:
  int in_width_ = 0;
  int width_ = 0;
  int arity_ = 0;
  bool trainable_interconnect_ = true;
  std::vector<double> table_logits_;
  std::vector<double> interconnect_logits_;
  std::vector<int> selection_;
};

/// Discrete evaluation with binarized tables and argmax selections.
std::vector<std::uint8_t> hard_forward(const LutLayer& layer,
                                       std::span<const std::uint8_t> bits);

/// Intermediates kept by a training forward pass for the matching backward.
struct LayerCache {
  GradientMode mode = GradientMode::kExpectation;
  std::size_t batch = 0;
  std::vector<double> input;  // batch x in_width
  bool valid() const { return batch > 0; }
};

struct LayerGrad {
  std::vector<double> table;         // d loss / d table_logits
  std::vector<double> interconnect;  // d loss / d interconnect_logits (empty if frozen)
  std::vector<double> input;         // d loss / d input probs (empty unless requested)
};

/// Batched relaxed forward, row-major batch x in_width -> batch x width.
/// Throws DomainError for inputs outside [0, 1]. Fills `cache` when given.
std::vector<double> relaxed_forward(const LutLayer& layer, std::span<const double> probs,
                                    std::size_t batch = 1,
                                    GradientMode mode = GradientMode::kExpectation,
                                    LayerCache* cache = nullptr);

/// Gradients for the forward pass recorded in `cache`. `upstream` is
/// batch x width. Throws StateError when the cache is empty or mismatched.
LayerGrad backward(const LutLayer& layer, const LayerCache& cache,
                   std::span<const double> upstream, bool want_input_grad);

}  // namespace dwc
