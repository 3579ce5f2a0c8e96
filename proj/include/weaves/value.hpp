#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weaves/ids.hpp"

// Cell values are uninterpreted bytes. These helpers give the typed views the
// runtime and demos use: little-endian i64, IEEE f64, and packed f64 arrays.
namespace weaves::value {

Bytes from_i64(std::int64_t v);
Bytes from_u64(std::uint64_t v);
Bytes from_f64(double v);
Bytes from_f64s(std::span<const double> v);
Bytes from_string(std::string_view s);

std::int64_t to_i64(std::span<const std::uint8_t> b);
std::uint64_t to_u64(std::span<const std::uint8_t> b);
double to_f64(std::span<const std::uint8_t> b);
std::vector<double> to_f64s(std::span<const std::uint8_t> b);
std::string to_string(std::span<const std::uint8_t> b);

/// Parses the config literal forms `i64:5`, `u64:7`, `f64:0.5`,
/// `f64[]:1,2,3`, `zeros:16`, `str:text`.
Bytes parse_literal(std::string_view text);

/// Inverse of parse_literal given a type hint; falls back to `hex:` form.
std::string format_literal(std::string_view type, std::span<const std::uint8_t> b);

}  // namespace weaves::value
