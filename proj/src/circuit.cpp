#include "dwc/circuit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "dwc/binio.hpp"
#include "dwc/errors.hpp"

namespace dwc {

namespace {

std::int64_t saturate(std::int64_t r, std::int64_t lo, std::int64_t hi) {
  return std::clamp(r, lo, hi);
}

// Smallest word in [lo, hi] whose normalized value reaches tau, or hi + 1.
std::int64_t integer_threshold(double tau, double scale, double mean, double stddev,
                               std::int64_t lo, std::int64_t hi) {
  auto fires = [&](std::int64_t r) {
    return normalize_clip_one(static_cast<double>(r) * scale, mean, stddev) >= tau;
  };
  if (!fires(hi)) return hi + 1;
  if (fires(lo)) return lo;
  std::int64_t a = lo;  // !fires(a)
  std::int64_t b = hi;  // fires(b)
  while (b - a > 1) {
    const std::int64_t m = a + (b - a) / 2;
    (fires(m) ? b : a) = m;
  }
  return b;
}

}  // namespace

AdcSpec default_adc(const RunningStats& stats, int bits) {
  if (bits < 2 || bits > 32) throw ConfigError("ADC width must be in [2, 32] bits");
  AdcSpec adc;
  adc.bits = bits;
  const double max_word = static_cast<double>(adc.max_word());
  for (std::size_t j = 0; j < stats.dim(); ++j) {
    const double range = std::abs(stats.mean()[j]) + kClipBound * stats.stddev(j);
    adc.scale.push_back(range > 0.0 ? range / max_word : 1.0);
  }
  return adc;
}

void CompiledCircuit::check() const {
  if (obs_dim <= 0 || act_dim <= 0 || bits <= 0 || group_size <= 0 || layers.empty()) {
    throw FormatError("circuit: empty shape");
  }
  if (adc_bits < 2 || adc_bits > 32) throw FormatError("circuit: bad ADC width");
  if (thresholds.size() != static_cast<std::size_t>(obs_dim * bits)) {
    throw FormatError("circuit: threshold count mismatch");
  }
  int in_width = input_bits();
  for (const auto& l : layers) {
    if (l.in_width != in_width || l.width <= 0 || l.arity < kMinArity || l.arity > kMaxArity) {
      throw FormatError("circuit: layer shape mismatch");
    }
    if (l.tables.size() != static_cast<std::size_t>(l.width) ||
        l.selection.size() != static_cast<std::size_t>(l.width * l.arity)) {
      throw FormatError("circuit: layer size mismatch");
    }
    for (auto s : l.selection) {
      if (s < 0 || s >= l.in_width) throw FormatError("circuit: selection out of range");
    }
    in_width = l.width;
  }
  if (final_width() != act_dim * group_size) throw FormatError("circuit: group size mismatch");
  if (sram.size() != static_cast<std::size_t>(act_dim * (group_size + 1))) {
    throw FormatError("circuit: action table size mismatch");
  }
}

std::int32_t quantize_action(double value, int frac) {
  if (std::isnan(value)) throw NumericError("quantize_action: NaN");
  const double scaled = std::ldexp(value, frac);
  // nearbyint rounds half to even in the default rounding mode.
  const double r = std::nearbyint(scaled);
  constexpr double lo = std::numeric_limits<std::int32_t>::min();
  constexpr double hi = std::numeric_limits<std::int32_t>::max();
  return static_cast<std::int32_t>(std::clamp(r, lo, hi));
}

std::vector<std::int32_t> build_action_table(const ActionHead& head, int d, int out_frac) {
  if (head.group_size < 1) throw ConfigError("group size must be at least 1");
  std::vector<std::int32_t> table;
  for (int s = 0; s <= head.group_size; ++s) {
    const double l = head_logit(head.alpha_p[static_cast<std::size_t>(d)],
                                head.beta[static_cast<std::size_t>(d)], s, head.group_size);
    table.push_back(quantize_action(apply_squash(head.squash, l), out_frac));
  }
  return table;
}

std::vector<double> folded_thresholds(const DwcPolicy& policy) {
  std::vector<double> out;
  for (std::size_t j = 0; j < policy.stats.dim(); ++j) {
    for (double tau : policy.thresholds.thresholds) {
      out.push_back(policy.stats.mean()[j] + policy.stats.stddev(j) * tau);
    }
  }
  return out;
}

CompiledCircuit binarize(const DwcPolicy& policy) {
  return binarize(policy, default_adc(policy.stats));
}

CompiledCircuit binarize(const DwcPolicy& policy, const AdcSpec& adc, int out_frac) {
  policy.check();
  if (!policy.stats.frozen()) {
    throw StateError("statistics are not frozen; finish training before compiling");
  }
  if (!policy.stats.usable()) throw StateError("statistics hold fewer than two samples");
  if (adc.scale.size() != policy.stats.dim()) throw ShapeError("ADC scale per dimension required");
  if (adc.bits < 2 || adc.bits > 32) throw ConfigError("ADC width must be in [2, 32] bits");
  if (out_frac < 0 || out_frac > 30) throw ConfigError("output fraction bits must be in [0, 30]");

  CompiledCircuit c;
  c.obs_dim = policy.obs_dim();
  c.act_dim = policy.act_dim();
  c.bits = policy.bits();
  c.adc_bits = adc.bits;
  c.out_frac = out_frac;
  c.group_size = policy.head.group_size;
  c.adc_scale = adc.scale;

  for (std::size_t j = 0; j < policy.stats.dim(); ++j) {
    const double mean = policy.stats.mean()[j];
    const double sd = policy.stats.stddev(j);
    for (double tau : policy.thresholds.thresholds) {
      c.thresholds.push_back(
          integer_threshold(tau, adc.scale[j], mean, sd, adc.min_word(), adc.max_word()));
    }
  }

  for (const auto& layer : policy.layers) {
    CompiledCircuit::Layer l;
    l.in_width = layer.in_width();
    l.width = layer.width();
    l.arity = layer.arity();
    for (int i = 0; i < layer.width(); ++i) {
      std::uint64_t word = 0;
      for (std::uint32_t a = 0; a < static_cast<std::uint32_t>(layer.table_size()); ++a) {
        if (layer.table_bit(i, a)) word |= std::uint64_t{1} << a;
      }
      l.tables.push_back(word);
    }
    l.selection.assign(layer.selection().begin(), layer.selection().end());
    c.layers.push_back(std::move(l));
  }

  for (int d = 0; d < c.act_dim; ++d) {
    const auto t = build_action_table(policy.head, d, out_frac);
    c.sram.insert(c.sram.end(), t.begin(), t.end());
  }
  c.check();
  return c;
}

std::vector<std::uint8_t> circuit_encode(const CompiledCircuit& c,
                                         std::span<const std::int64_t> raw) {
  if (raw.size() != static_cast<std::size_t>(c.obs_dim)) {
    throw ShapeError("circuit: expected " + std::to_string(c.obs_dim) + " input words");
  }
  const auto b = static_cast<std::size_t>(c.bits);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(c.input_bits()));
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const std::int64_t r = saturate(raw[j], c.min_word(), c.max_word());
    for (std::size_t m = 0; m < b; ++m) bits[j * b + m] = r >= c.thresholds[j * b + m] ? 1 : 0;
  }
  return bits;
}

std::vector<int> circuit_popcounts(const CompiledCircuit& c, std::span<const std::int64_t> raw) {
  std::vector<std::uint8_t> x = circuit_encode(c, raw);
  for (const auto& l : c.layers) {
    std::vector<std::uint8_t> y(static_cast<std::size_t>(l.width));
    for (std::size_t i = 0; i < y.size(); ++i) {
      std::uint32_t a = 0;
      for (std::size_t j = 0; j < static_cast<std::size_t>(l.arity); ++j) {
        a |= static_cast<std::uint32_t>(
                 x[static_cast<std::size_t>(l.selection[i * static_cast<std::size_t>(l.arity) + j])])
             << j;
      }
      y[i] = static_cast<std::uint8_t>((l.tables[i] >> a) & 1u);
    }
    x = std::move(y);
  }
  std::vector<int> counts(static_cast<std::size_t>(c.act_dim), 0);
  const auto g = static_cast<std::size_t>(c.group_size);
  for (std::size_t i = 0; i < x.size(); ++i) counts[i / g] += x[i];
  return counts;
}

std::vector<std::int32_t> circuit_eval(const CompiledCircuit& c,
                                       std::span<const std::int64_t> raw) {
  const auto counts = circuit_popcounts(c, raw);
  std::vector<std::int32_t> out;
  for (int d = 0; d < c.act_dim; ++d) {
    out.push_back(c.action_table(d)[static_cast<std::size_t>(counts[static_cast<std::size_t>(d)])]);
  }
  return out;
}

std::vector<double> adc_to_real(const AdcSpec& adc, std::span<const std::int64_t> raw) {
  if (raw.size() != adc.scale.size()) throw ShapeError("ADC: word count mismatch");
  std::vector<double> x(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) x[j] = static_cast<double>(raw[j]) * adc.scale[j];
  return x;
}

std::vector<std::int32_t> reference_action_words(const DwcPolicy& policy, const AdcSpec& adc,
                                                 std::span<const std::int64_t> raw,
                                                 int out_frac) {
  std::vector<std::int64_t> sat(raw.begin(), raw.end());
  for (auto& r : sat) r = saturate(r, adc.min_word(), adc.max_word());
  const auto x = adc_to_real(adc, sat);
  const auto normalized = normalize_clip(x, policy.stats);
  const auto logits = hard_logits(policy, normalized);
  std::vector<std::int32_t> out;
  for (double l : logits) out.push_back(quantize_action(apply_squash(policy.head.squash, l), out_frac));
  return out;
}

namespace {

constexpr std::uint8_t kAddressLsbFirst = 0;

std::vector<std::uint8_t> pack_tables(const CompiledCircuit::Layer& l) {
  // 2^k bits per LUT, LSB-first within each byte, LUTs concatenated.
  const std::size_t per = (std::size_t{1} << l.arity);
  const std::size_t nbits = per * l.tables.size();
  std::vector<std::uint8_t> out((nbits + 7) / 8, 0);
  for (std::size_t i = 0; i < l.tables.size(); ++i) {
    for (std::size_t a = 0; a < per; ++a) {
      if ((l.tables[i] >> a) & 1u) {
        const std::size_t bit = i * per + a;
        out[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> serialize_circuit(const CompiledCircuit& c) {
  c.check();
  std::vector<Section> sections;
  ByteWriter h;
  h.u32(static_cast<std::uint32_t>(c.obs_dim));
  h.u32(static_cast<std::uint32_t>(c.act_dim));
  h.u32(static_cast<std::uint32_t>(c.bits));
  h.u32(static_cast<std::uint32_t>(c.adc_bits));
  h.u32(static_cast<std::uint32_t>(c.out_frac));
  h.u32(static_cast<std::uint32_t>(c.group_size));
  h.u32(static_cast<std::uint32_t>(c.layers.size()));
  h.u8(kAddressLsbFirst);
  sections.push_back({make_tag("CHDR"), h.take()});

  ByteWriter t;
  for (auto v : c.thresholds) t.i64(v);
  sections.push_back({make_tag("THRI"), t.take()});

  for (const auto& l : c.layers) {
    ByteWriter lt;
    lt.u32(static_cast<std::uint32_t>(l.in_width));
    lt.u32(static_cast<std::uint32_t>(l.width));
    lt.u32(static_cast<std::uint32_t>(l.arity));
    lt.bytes(pack_tables(l));
    sections.push_back({make_tag("TABL"), lt.take()});
    ByteWriter ls;
    for (auto s : l.selection) ls.i32(s);
    sections.push_back({make_tag("SELS"), ls.take()});
  }

  ByteWriter s;
  for (auto v : c.sram) s.i32(v);
  sections.push_back({make_tag("SRAM"), s.take()});

  ByteWriter a;
  a.f64s(c.adc_scale);
  sections.push_back({make_tag("ADCS"), a.take()});
  return pack_container(FileKind::kCircuit, sections);
}

CompiledCircuit deserialize_circuit(std::span<const std::uint8_t> bytes) {
  const auto sections = unpack_container(bytes, FileKind::kCircuit);
  CompiledCircuit c;
  ByteReader h(find_section(sections, "CHDR").payload);
  c.obs_dim = static_cast<int>(h.u32());
  c.act_dim = static_cast<int>(h.u32());
  c.bits = static_cast<int>(h.u32());
  c.adc_bits = static_cast<int>(h.u32());
  c.out_frac = static_cast<int>(h.u32());
  c.group_size = static_cast<int>(h.u32());
  const auto num_layers = h.u32();
  if (h.u8() != kAddressLsbFirst) throw FormatError("unsupported address convention");
  h.expect_end("CHDR");
  if (c.obs_dim <= 0 || c.bits <= 0 || c.obs_dim > (1 << 20) || c.bits > (1 << 16)) {
    throw FormatError("circuit: bad header");
  }

  ByteReader t(find_section(sections, "THRI").payload);
  for (int n = 0; n < c.obs_dim * c.bits; ++n) c.thresholds.push_back(t.i64());
  t.expect_end("THRI");

  std::vector<const Section*> tabl;
  std::vector<const Section*> sels;
  for (const auto& s : sections) {
    if (s.tag == make_tag("TABL")) tabl.push_back(&s);
    if (s.tag == make_tag("SELS")) sels.push_back(&s);
  }
  if (tabl.size() != num_layers || sels.size() != num_layers) {
    throw FormatError("circuit: layer count mismatch");
  }
  for (std::size_t n = 0; n < num_layers; ++n) {
    CompiledCircuit::Layer l;
    ByteReader lt(tabl[n]->payload);
    l.in_width = static_cast<int>(lt.u32());
    l.width = static_cast<int>(lt.u32());
    l.arity = static_cast<int>(lt.u32());
    if (l.arity < kMinArity || l.arity > kMaxArity || l.width <= 0) {
      throw FormatError("circuit: bad layer shape");
    }
    const std::size_t per = std::size_t{1} << l.arity;
    const auto packed = lt.bytes((per * static_cast<std::size_t>(l.width) + 7) / 8);
    lt.expect_end("TABL");
    l.tables.assign(static_cast<std::size_t>(l.width), 0);
    for (std::size_t i = 0; i < l.tables.size(); ++i) {
      for (std::size_t a = 0; a < per; ++a) {
        const std::size_t bit = i * per + a;
        if ((packed[bit / 8] >> (bit % 8)) & 1u) l.tables[i] |= std::uint64_t{1} << a;
      }
    }
    ByteReader ls(sels[n]->payload);
    for (int s = 0; s < l.width * l.arity; ++s) l.selection.push_back(ls.i32());
    ls.expect_end("SELS");
    c.layers.push_back(std::move(l));
  }

  ByteReader s(find_section(sections, "SRAM").payload);
  if (s.remaining() % 4 != 0) throw FormatError("circuit: bad action table size");
  while (s.remaining() > 0) c.sram.push_back(s.i32());

  ByteReader a(find_section(sections, "ADCS").payload);
  c.adc_scale = a.f64s(static_cast<std::size_t>(c.obs_dim));
  a.expect_end("ADCS");
  c.check();
  return c;
}

void save_circuit(const CompiledCircuit& circuit, const std::string& path) {
  write_file(path, serialize_circuit(circuit));
}

CompiledCircuit load_circuit(const std::string& path) {
  return deserialize_circuit(read_file(path));
}

}  // namespace dwc
