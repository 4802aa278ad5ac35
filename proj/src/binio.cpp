#include "dwc/binio.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "dwc/errors.hpp"

namespace dwc {

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::f64s(std::span<const double> v) {
  for (double d : v) f64(d);
}

void ByteWriter::str(const std::string& s) {
  u64(s.size());
  buf_.insert(buf_.end(), s.begin(), s.end());
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  if (n > remaining()) throw FormatError("unexpected end of data");
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint32_t ByteReader::u32() {
  const auto b = take(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

std::uint64_t ByteReader::u64() {
  const auto b = take(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::vector<double> ByteReader::f64s(std::size_t n) {
  if (n > remaining() / 8) throw FormatError("unexpected end of data");
  std::vector<double> out(n);
  for (auto& d : out) d = f64();
  return out;
}

std::string ByteReader::str() {
  const auto n = u64();
  if (n > remaining()) throw FormatError("unexpected end of data");
  const auto b = take(static_cast<std::size_t>(n));
  return {b.begin(), b.end()};
}

std::span<const std::uint8_t> ByteReader::bytes(std::size_t n) { return take(n); }

void ByteReader::expect_end(const std::string& what) const {
  if (remaining() != 0) throw FormatError(what + ": trailing bytes in section");
}

SectionTag make_tag(const char (&tag)[5]) { return {tag[0], tag[1], tag[2], tag[3]}; }

namespace {
constexpr char kMagic[4] = {'D', 'W', 'C', 'F'};
}

std::vector<std::uint8_t> pack_container(FileKind kind, const std::vector<Section>& sections) {
  ByteWriter w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(kind));
  w.u32(static_cast<std::uint32_t>(sections.size()));
  for (const auto& s : sections) {
    for (char c : s.tag) w.u8(static_cast<std::uint8_t>(c));
    w.u64(s.payload.size());
    w.bytes(s.payload);
  }
  return w.take();
}

std::vector<Section> unpack_container(std::span<const std::uint8_t> bytes, FileKind kind) {
  ByteReader r(bytes);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("not a DWC file (bad magic)");
  }
  r.bytes(4);
  const auto version = r.u32();
  if (version != kFormatVersion) {
    throw FormatError("unsupported format version " + std::to_string(version) + " (expected " +
                      std::to_string(kFormatVersion) + ")");
  }
  const auto k = r.u32();
  if (k != static_cast<std::uint32_t>(kind)) {
    throw FormatError(kind == FileKind::kModel ? "file is not a model file"
                                               : "file is not a circuit file");
  }
  const auto count = r.u32();
  std::vector<Section> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    Section s{};
    const auto tag = r.bytes(4);
    std::copy(tag.begin(), tag.end(), s.tag.begin());
    const auto len = r.u64();
    if (len > r.remaining()) throw FormatError("truncated section");
    const auto payload = r.bytes(static_cast<std::size_t>(len));
    s.payload.assign(payload.begin(), payload.end());
    out.push_back(std::move(s));
  }
  r.expect_end("container");
  return out;
}

const Section& find_section(const std::vector<Section>& sections, const char (&tag)[5]) {
  const auto t = make_tag(tag);
  const Section* found = nullptr;
  for (const auto& s : sections) {
    if (s.tag == t) {
      if (found) throw FormatError(std::string("duplicate section ") + tag);
      found = &s;
    }
  }
  if (!found) throw FormatError(std::string("missing section ") + tag);
  return *found;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const auto tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write '" + tmp + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace dwc
