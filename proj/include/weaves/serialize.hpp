#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "weaves/ids.hpp"

namespace weaves {

/// Little-endian binary writer used by checkpoint images and transport state.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void bytes(std::span<const std::uint8_t> b);  // u64 length prefix
  void str(std::string_view s);
  void raw(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

  /// Opens a length-prefixed section; returns a token for end_section.
  std::size_t begin_section();
  void end_section(std::size_t token);

  const Bytes& data() const& { return out_; }
  Bytes take() && { return std::move(out_); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  Bytes bytes();
  std::string str();
  std::span<const std::uint8_t> raw(std::size_t n);

  /// Reads a section length and returns a reader over exactly that payload.
  ByteReader section();

  bool done() const { return pos_ == in_.size(); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const;

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace weaves
