#pragma once

#include <cstdint>
#include <string>

#include "dwc/circuit.hpp"

namespace dwc {

/// Structural cost model of the emitted RTL. Counts are estimates for a
/// 6-input LUT fabric, not vendor synthesis results.
struct ResourceReport {
  std::int64_t lut_count = 0;       // LUT layers plus popcount trees
  std::int64_t popcount_luts = 0;   // part of lut_count
  std::int64_t ff_estimate = 0;     // pipeline registers plus ROM output registers
  int pipeline_stages = 0;
  int logic_depth = 0;              // L + ceil(log2 |G|) + 1
  int latency_cycles = 0;
  std::int64_t sram_words = 0;      // d_act * (|G| + 1)
  int output_bits = 0;
};

/// 6-LUT estimate of a popcount over n bits: 6:3 compressors on the leaves,
/// then a balanced ripple-adder tree costing one LUT per sum bit.
std::int64_t popcount_lut_estimate(int n);

/// Throws ConfigError for stage counts emit_rtl would reject.
ResourceReport resource_report(const CompiledCircuit& circuit, int pipeline_stages);

/// Human-readable `key: value` lines.
std::string to_text(const ResourceReport& report);

}  // namespace dwc
