#include "dwc/resources.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <vector>

#include "dwc/errors.hpp"
#include "dwc/rtl.hpp"

namespace dwc {

namespace {

int bits_for(int max_value) {
  return std::max(1, static_cast<int>(std::bit_width(static_cast<unsigned>(max_value))));
}

int ceil_log2(int n) { return n <= 1 ? 0 : static_cast<int>(std::bit_width(static_cast<unsigned>(n - 1))); }

}  // namespace

std::int64_t popcount_lut_estimate(int n) {
  if (n <= 1) return 0;
  std::int64_t luts = 0;
  std::vector<int> widths;
  for (int start = 0; start < n; start += 6) {
    const int m = std::min(6, n - start);
    const int w = bits_for(m);
    if (m > 1) luts += w;  // one LUT per output bit of the compressor
    widths.push_back(w);
  }
  while (widths.size() > 1) {
    std::vector<int> next;
    for (std::size_t i = 0; i + 1 < widths.size(); i += 2) {
      const int w = std::max(widths[i], widths[i + 1]);
      luts += w;
      next.push_back(w + 1);
    }
    if (widths.size() % 2 == 1) next.push_back(widths.back());
    widths = std::move(next);
  }
  return luts;
}

ResourceReport resource_report(const CompiledCircuit& c, int stages) {
  c.check();
  if (stages < 0 || stages > kMaxPipelineStages) {
    throw ConfigError("pipeline stages must be 0, 1 or 2, got " + std::to_string(stages));
  }
  if (stages > 0 && c.layers.size() < 2) {
    throw ConfigError("pipeline stages need at least two LUT layers");
  }
  ResourceReport r;
  for (const auto& l : c.layers) r.lut_count += l.width;
  r.popcount_luts = static_cast<std::int64_t>(c.act_dim) * popcount_lut_estimate(c.group_size);
  r.lut_count += r.popcount_luts;
  r.pipeline_stages = stages;
  r.output_bits = output_word_width(c);
  r.ff_estimate = static_cast<std::int64_t>(c.act_dim) * r.output_bits;
  if (stages >= 1) r.ff_estimate += c.layers.front().width;
  if (stages >= 2) r.ff_estimate += c.final_width();
  r.logic_depth = static_cast<int>(c.layers.size()) + ceil_log2(c.group_size) + 1;
  r.latency_cycles = rtl_latency(stages);
  r.sram_words = static_cast<std::int64_t>(c.act_dim) * (c.group_size + 1);
  return r;
}

std::string to_text(const ResourceReport& r) {
  std::ostringstream os;
  os << "lut_count: " << r.lut_count << "\n"
     << "popcount_luts: " << r.popcount_luts << "\n"
     << "ff_estimate: " << r.ff_estimate << "\n"
     << "pipeline_stages: " << r.pipeline_stages << "\n"
     << "logic_depth: " << r.logic_depth << "\n"
     << "latency_cycles: " << r.latency_cycles << "\n"
     << "sram_words: " << r.sram_words << "\n"
     << "output_bits: " << r.output_bits << "\n";
  return os.str();
}

}  // namespace dwc
