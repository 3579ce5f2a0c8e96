#include "weaves/value.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <iomanip>
#include <sstream>

#include "weaves/error.hpp"

namespace weaves::value {

namespace {

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[offset + i]} << (8 * i);
  return v;
}

void require_size(std::span<const std::uint8_t> b, std::size_t n, const char* what) {
  if (b.size() < n)
    throw Error(ErrorCode::InvalidArgument,
                std::string("cell too short for ") + what + " (" + std::to_string(b.size()) +
                    " bytes)");
}

double parse_double(std::string_view s) {
  std::string tmp(s);
  std::size_t used = 0;
  double v = std::stod(tmp, &used);
  if (used != tmp.size()) throw Error(ErrorCode::InvalidArgument, "bad number '" + tmp + "'");
  return v;
}

template <class Int>
Int parse_int(std::string_view s) {
  Int v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw Error(ErrorCode::InvalidArgument, "bad integer '" + std::string(s) + "'");
  return v;
}

}  // namespace

Bytes from_i64(std::int64_t v) { return from_u64(static_cast<std::uint64_t>(v)); }

Bytes from_u64(std::uint64_t v) {
  Bytes out;
  out.reserve(8);
  put_u64(out, v);
  return out;
}

Bytes from_f64(double v) { return from_u64(std::bit_cast<std::uint64_t>(v)); }

Bytes from_f64s(std::span<const double> v) {
  Bytes out;
  out.reserve(v.size() * 8);
  for (double d : v) put_u64(out, std::bit_cast<std::uint64_t>(d));
  return out;
}

Bytes from_string(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::int64_t to_i64(std::span<const std::uint8_t> b) { return static_cast<std::int64_t>(to_u64(b)); }

std::uint64_t to_u64(std::span<const std::uint8_t> b) {
  require_size(b, 8, "u64");
  return get_u64(b, 0);
}

double to_f64(std::span<const std::uint8_t> b) { return std::bit_cast<double>(to_u64(b)); }

std::vector<double> to_f64s(std::span<const std::uint8_t> b) {
  std::vector<double> out(b.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::bit_cast<double>(get_u64(b, 8 * i));
  return out;
}

std::string to_string(std::span<const std::uint8_t> b) { return std::string(b.begin(), b.end()); }

Bytes parse_literal(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorCode::InvalidArgument, "literal needs a type prefix: '" + std::string(text) + "'");
  auto type = text.substr(0, colon);
  auto body = text.substr(colon + 1);
  if (type == "i64") return from_i64(parse_int<std::int64_t>(body));
  if (type == "u64") return from_u64(parse_int<std::uint64_t>(body));
  if (type == "f64") return from_f64(parse_double(body));
  if (type == "str") return from_string(body);
  if (type == "zeros") return Bytes(parse_int<std::size_t>(body), 0);
  if (type == "f64[]") {
    std::vector<double> values;
    while (!body.empty()) {
      auto comma = body.find(',');
      values.push_back(parse_double(body.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      body.remove_prefix(comma + 1);
    }
    return from_f64s(values);
  }
  if (type == "hex") {
    if (body.size() % 2) throw Error(ErrorCode::InvalidArgument, "odd-length hex literal");
    Bytes out;
    for (std::size_t i = 0; i < body.size(); i += 2) {
      unsigned byte = 0;
      auto [p, ec] = std::from_chars(body.data() + i, body.data() + i + 2, byte, 16);
      if (ec != std::errc{} || p != body.data() + i + 2)
        throw Error(ErrorCode::InvalidArgument, "bad hex literal");
      out.push_back(static_cast<std::uint8_t>(byte));
    }
    return out;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown literal type '" + std::string(type) + "'");
}

std::string format_literal(std::string_view type, std::span<const std::uint8_t> b) {
  std::ostringstream os;
  os << std::setprecision(17);
  if (type == "i64" && b.size() == 8) {
    os << "i64:" << to_i64(b);
  } else if (type == "u64" && b.size() == 8) {
    os << "u64:" << to_u64(b);
  } else if (type == "f64" && b.size() == 8) {
    os << "f64:" << to_f64(b);
  } else if (type == "f64[]" && b.size() % 8 == 0) {
    os << "f64[]:";
    auto v = to_f64s(b);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  } else if (type == "str") {
    os << "str:" << to_string(b);
  } else if (type == "zeros" && std::all_of(b.begin(), b.end(), [](auto c) { return c == 0; })) {
    os << "zeros:" << b.size();
  } else {
    os << "hex:" << std::hex << std::setfill('0');
    for (auto c : b) os << std::setw(2) << unsigned{c};
  }
  return os.str();
}

}  // namespace weaves::value
