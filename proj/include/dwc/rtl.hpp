#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dwc/circuit.hpp"

namespace dwc {

inline constexpr int kMaxPipelineStages = 2;

/// Narrowest two's-complement width holding every action-table entry.
int output_word_width(const CompiledCircuit& circuit);

/// Clock cycles from input to output: one per pipeline cut plus the ROM read.
inline int rtl_latency(int stages) { return stages + 1; }

/// Verilog text for `circuit`. Ports: clk, x (thermometer bits, dimension
/// major), y0..y{d-1} (signed action words). Stage 1 registers the output of
/// the first LUT layer, stage 2 additionally registers the last layer before
/// the popcount. Throws ConfigError for stages outside 0..2 or cuts that the
/// layer count cannot place.
std::string emit_rtl(const CompiledCircuit& circuit, int stages,
                     const std::string& module_name = "dwc_policy");

/// Bit vector of arbitrary width, word 0 holds bits 0..63.
struct BitVec {
  int width = 0;
  std::vector<std::uint64_t> words;

  BitVec() = default;
  explicit BitVec(int w) : width(w), words(static_cast<std::size_t>((w + 63) / 64), 0) {}
  bool bit(int i) const { return (words[static_cast<std::size_t>(i / 64)] >> (i % 64)) & 1u; }
  void set_bit(int i, bool v);
  /// Low 64 bits.
  std::uint64_t low() const { return words.empty() ? 0 : words[0]; }
  /// Copy truncated or zero-extended to `w` bits.
  BitVec resized(int w) const;
};

struct RtlExpr;
struct RtlModule;

/// Parses the subset emit_rtl produces: one module with wire/reg (including
/// memory) declarations, continuous assigns, a posedge always block with
/// nonblocking assigns, and initial blocks filling memories. Expressions are
/// literals, names, bit/word selects, concatenation, + and >>. Throws
/// FormatError with a line number on anything else.
std::shared_ptr<const RtlModule> parse_rtl(const std::string& text);

/// Cycle-based two-value simulator for a parsed module.
class RtlSimulator {
 public:
  explicit RtlSimulator(std::shared_ptr<const RtlModule> module);

  const std::string& module_name() const;
  std::vector<std::string> input_ports() const;
  std::vector<std::string> output_ports() const;
  int port_width(const std::string& name) const;

  void set_input(const std::string& port, std::span<const std::uint8_t> bits);
  /// One rising edge of clk: registers sample, then combinational logic settles.
  void tick();
  /// Combinational settle without a clock edge.
  void settle();
  BitVec read(const std::string& net) const;
  std::int64_t read_signed(const std::string& port) const;

 private:
  struct State;
  std::shared_ptr<const RtlModule> module_;
  std::shared_ptr<State> state_;
};

/// Drives one input vector, waits `latency` edges and returns y0..y{d-1}.
std::vector<std::int32_t> rtl_eval(RtlSimulator& sim, std::span<const std::uint8_t> bits,
                                   int act_dim, int latency);

}  // namespace dwc
