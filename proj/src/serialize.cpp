#include "weaves/serialize.hpp"

#include <bit>

#include "weaves/error.hpp"

namespace weaves {

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::bytes(std::span<const std::uint8_t> b) {
  u64(b.size());
  raw(b);
}

void ByteWriter::str(std::string_view s) {
  u64(s.size());
  out_.insert(out_.end(), s.begin(), s.end());
}

std::size_t ByteWriter::begin_section() {
  std::size_t token = out_.size();
  u64(0);
  return token;
}

void ByteWriter::end_section(std::size_t token) {
  std::uint64_t len = out_.size() - token - 8;
  for (int i = 0; i < 8; ++i) out_[token + i] = static_cast<std::uint8_t>(len >> (8 * i));
}

void ByteReader::need(std::size_t n) const {
  if (in_.size() - pos_ < n)
    throw Error(ErrorCode::CorruptImage, "truncated input: need " + std::to_string(n) +
                                             " bytes, have " + std::to_string(in_.size() - pos_));
}

std::uint8_t ByteReader::u8() {
  need(1);
  return in_[pos_++];
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_ + i]} << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{in_[pos_ + i]} << (8 * i);
  pos_ += 8;
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::span<const std::uint8_t> ByteReader::raw(std::size_t n) {
  need(n);
  auto s = in_.subspan(pos_, n);
  pos_ += n;
  return s;
}

Bytes ByteReader::bytes() {
  auto n = u64();
  auto s = raw(n);
  return Bytes(s.begin(), s.end());
}

std::string ByteReader::str() {
  auto n = u64();
  auto s = raw(n);
  return std::string(s.begin(), s.end());
}

ByteReader ByteReader::section() {
  auto n = u64();
  return ByteReader(raw(n));
}

}  // namespace weaves
