#pragma once

#include <span>
#include <string>
#include <vector>

namespace dwc {

enum class Squash { kTanh, kIdentity };

Squash parse_squash(const std::string& name);
std::string to_string(Squash squash);

/// Per-action affine heads over contiguous, equally sized groups of the final
/// layer: z_d = s_d / |G| - 1/2, l_d = exp(alpha_p_d) * z_d + beta_d.
struct ActionHead {
  int actions = 0;
  int group_size = 0;
  std::vector<double> alpha_p;
  std::vector<double> beta;
  Squash squash = Squash::kTanh;

  int input_width() const { return actions * group_size; }
  double alpha(int d) const;
};

/// The head logit for a group sum. Hard evaluation, SRAM table construction
/// and the relaxed path all go through this one expression.
double head_logit(double alpha_p, double beta, double group_sum, int group_size);

/// Pre-squash logits for a batch of final-layer activations (batch x width).
std::vector<double> head_forward(const ActionHead& head, std::span<const double> final,
                                 std::size_t batch = 1);

struct HeadGrad {
  std::vector<double> alpha_p;
  std::vector<double> beta;
  std::vector<double> final;  // batch x width
};

HeadGrad head_backward(const ActionHead& head, std::span<const double> final,
                       std::span<const double> dlogits, std::size_t batch = 1);

double apply_squash(Squash squash, double logit);

}  // namespace dwc
