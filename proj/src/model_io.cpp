#include "dwc/model_io.hpp"

#include "dwc/binio.hpp"
#include "dwc/errors.hpp"

namespace dwc {

namespace {

constexpr std::uint8_t kAddressLsbFirst = 0;

std::uint8_t squash_code(Squash s) { return s == Squash::kTanh ? 0 : 1; }
std::uint8_t gradient_code(GradientMode g) { return g == GradientMode::kExpectation ? 0 : 1; }

}  // namespace

std::vector<std::uint8_t> serialize_policy(const DwcPolicy& policy, const std::string& config_text) {
  policy.check();
  std::vector<Section> sections;

  ByteWriter head;
  head.u32(static_cast<std::uint32_t>(policy.obs_dim()));
  head.u32(static_cast<std::uint32_t>(policy.act_dim()));
  head.u32(static_cast<std::uint32_t>(policy.layers.size()));
  head.u8(kAddressLsbFirst);
  head.u8(gradient_code(policy.gradient));
  head.u8(policy.mode == PolicyMode::kHard ? 1 : 0);
  sections.push_back({make_tag("HEAD"), head.take()});

  ByteWriter thr;
  thr.u32(static_cast<std::uint32_t>(policy.bits()));
  thr.f64(policy.thresholds.clip_lo);
  thr.f64(policy.thresholds.clip_hi);
  thr.f64s(policy.thresholds.thresholds);
  sections.push_back({make_tag("THRS"), thr.take()});

  ByteWriter st;
  st.u64(policy.stats.count());
  st.u8(policy.stats.frozen() ? 1 : 0);
  st.f64s(policy.stats.mean());
  st.f64s(policy.stats.m2());
  sections.push_back({make_tag("STAT"), st.take()});

  for (const auto& layer : policy.layers) {
    ByteWriter lw;
    lw.u32(static_cast<std::uint32_t>(layer.in_width()));
    lw.u32(static_cast<std::uint32_t>(layer.width()));
    lw.u32(static_cast<std::uint32_t>(layer.arity()));
    lw.u8(layer.trainable_interconnect() ? 1 : 0);
    lw.f64s(layer.table_logits());
    lw.f64s(layer.interconnect_logits());
    sections.push_back({make_tag("LAYR"), lw.take()});
  }

  ByteWriter hw;
  hw.u32(static_cast<std::uint32_t>(policy.head.actions));
  hw.u32(static_cast<std::uint32_t>(policy.head.group_size));
  hw.u8(squash_code(policy.head.squash));
  hw.f64s(policy.head.alpha_p);
  hw.f64s(policy.head.beta);
  sections.push_back({make_tag("ACTH"), hw.take()});

  if (!config_text.empty()) {
    ByteWriter cw;
    cw.str(config_text);
    sections.push_back({make_tag("CONF"), cw.take()});
  }
  return pack_container(FileKind::kModel, sections);
}

DwcPolicy deserialize_policy(std::span<const std::uint8_t> bytes) {
  const auto sections = unpack_container(bytes, FileKind::kModel);
  DwcPolicy policy;

  ByteReader head(find_section(sections, "HEAD").payload);
  const auto obs_dim = head.u32();
  const auto act_dim = head.u32();
  const auto num_layers = head.u32();
  if (head.u8() != kAddressLsbFirst) throw FormatError("unsupported address convention");
  const auto grad = head.u8();
  if (grad > 1) throw FormatError("unknown gradient mode");
  policy.gradient = grad == 0 ? GradientMode::kExpectation : GradientMode::kEfd;
  policy.mode = head.u8() == 1 ? PolicyMode::kHard : PolicyMode::kRelaxed;
  head.expect_end("HEAD");
  if (obs_dim == 0 || act_dim == 0 || num_layers == 0) throw FormatError("empty model shape");

  ByteReader thr(find_section(sections, "THRS").payload);
  policy.thresholds.bits = static_cast<int>(thr.u32());
  policy.thresholds.clip_lo = thr.f64();
  policy.thresholds.clip_hi = thr.f64();
  policy.thresholds.thresholds = thr.f64s(static_cast<std::size_t>(policy.thresholds.bits));
  thr.expect_end("THRS");

  ByteReader st(find_section(sections, "STAT").payload);
  const auto count = st.u64();
  const bool frozen = st.u8() != 0;
  auto mean = st.f64s(obs_dim);
  auto m2 = st.f64s(obs_dim);
  st.expect_end("STAT");
  policy.stats = RunningStats(count, std::move(mean), std::move(m2), frozen);

  std::size_t seen = 0;
  for (const auto& s : sections) {
    if (s.tag != make_tag("LAYR")) continue;
    ByteReader lr(s.payload);
    const auto in_width = static_cast<int>(lr.u32());
    const auto width = static_cast<int>(lr.u32());
    const auto arity = static_cast<int>(lr.u32());
    const bool trainable = lr.u8() != 0;
    if (arity < kMinArity || arity > kMaxArity || in_width <= 0 || width <= 0) {
      throw FormatError("invalid layer shape");
    }
    const auto table_n = static_cast<std::size_t>(width) << arity;
    const auto inter_n = static_cast<std::size_t>(width) * static_cast<std::size_t>(arity) *
                         static_cast<std::size_t>(in_width);
    if (lr.remaining() != 8 * (table_n + inter_n)) throw FormatError("layer size mismatch");
    LutLayer layer(in_width, width, arity, trainable);
    const auto t = lr.f64s(table_n);
    const auto c = lr.f64s(inter_n);
    std::copy(t.begin(), t.end(), layer.table_logits().begin());
    std::copy(c.begin(), c.end(), layer.interconnect_logits().begin());
    layer.refresh_selection();
    policy.layers.push_back(std::move(layer));
    ++seen;
  }
  if (seen != num_layers) throw FormatError("layer count mismatch");

  ByteReader hr(find_section(sections, "ACTH").payload);
  policy.head.actions = static_cast<int>(hr.u32());
  policy.head.group_size = static_cast<int>(hr.u32());
  const auto sq = hr.u8();
  if (sq > 1) throw FormatError("unknown squash");
  policy.head.squash = sq == 0 ? Squash::kTanh : Squash::kIdentity;
  if (policy.head.actions != static_cast<int>(act_dim)) throw FormatError("action count mismatch");
  policy.head.alpha_p = hr.f64s(act_dim);
  policy.head.beta = hr.f64s(act_dim);
  hr.expect_end("ACTH");

  try {
    policy.check();
  } catch (const std::exception& e) {
    throw FormatError(std::string("inconsistent model: ") + e.what());
  }
  return policy;
}

std::string model_config_text(std::span<const std::uint8_t> bytes) {
  const auto sections = unpack_container(bytes, FileKind::kModel);
  for (const auto& s : sections) {
    if (s.tag == make_tag("CONF")) {
      ByteReader r(s.payload);
      auto text = r.str();
      r.expect_end("CONF");
      return text;
    }
  }
  return {};
}

void save_policy(const DwcPolicy& policy, const std::string& path, const std::string& config_text) {
  write_file(path, serialize_policy(policy, config_text));
}

DwcPolicy load_policy(const std::string& path) { return deserialize_policy(read_file(path)); }

}  // namespace dwc
