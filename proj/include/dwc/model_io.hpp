#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dwc/policy.hpp"

namespace dwc {

/// Model file bytes: thresholds, statistics, every layer's logits as f64, and
/// the head parameters. Contains no timestamps, so equal policies give equal
/// bytes. A non-empty `config_text` is stored alongside for provenance.
std::vector<std::uint8_t> serialize_policy(const DwcPolicy& policy,
                                           const std::string& config_text = {});

/// Inverse of serialize_policy. Throws FormatError on version mismatch,
/// truncation or inconsistent shapes; nothing is returned on failure.
DwcPolicy deserialize_policy(std::span<const std::uint8_t> bytes);

/// Stored config text, or empty when the file carries none.
std::string model_config_text(std::span<const std::uint8_t> bytes);

void save_policy(const DwcPolicy& policy, const std::string& path,
                 const std::string& config_text = {});
DwcPolicy load_policy(const std::string& path);

}  // namespace dwc
