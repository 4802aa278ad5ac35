#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dwc {

/// Little-endian encoder for the section payloads.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v);
  void f64s(std::span<const double> v);
  void str(const std::string& s);
  void bytes(std::span<const std::uint8_t> v) { buf_.insert(buf_.end(), v.begin(), v.end()); }

  const std::vector<std::uint8_t>& data() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

/// Bounds-checked little-endian decoder; throws FormatError on overrun.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64();
  std::vector<double> f64s(std::size_t n);
  std::string str();
  std::span<const std::uint8_t> bytes(std::size_t n);

  std::size_t remaining() const { return data_.size() - pos_; }
  /// Throws FormatError unless every byte was consumed.
  void expect_end(const std::string& what) const;

 private:
  std::span<const std::uint8_t> take(std::size_t n);

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

using SectionTag = std::array<char, 4>;

struct Section {
  SectionTag tag;
  std::vector<std::uint8_t> payload;
};

enum class FileKind : std::uint32_t { kModel = 1, kCircuit = 2 };

inline constexpr std::uint32_t kFormatVersion = 1;

/// File layout: "DWCF", u32 version, u32 kind, u32 section count, then per
/// section a 4-byte tag, a u64 payload length and the payload.
std::vector<std::uint8_t> pack_container(FileKind kind, const std::vector<Section>& sections);

/// Validates the header and every section boundary before returning anything.
/// Throws FormatError on bad magic, unsupported version, wrong kind or
/// truncation.
std::vector<Section> unpack_container(std::span<const std::uint8_t> bytes, FileKind kind);

/// Returns the payload of the unique section with `tag`; FormatError if absent.
const Section& find_section(const std::vector<Section>& sections, const char (&tag)[5]);

std::vector<std::uint8_t> read_file(const std::string& path);
/// Writes through a temporary file and a rename so readers never see a
/// half-written file.
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

SectionTag make_tag(const char (&tag)[5]);

}  // namespace dwc
