#pragma once

#include <span>
#include <string>
#include <string_view>

#include "weaves/ids.hpp"

namespace weaves {

class Runtime;

/// Serialized runtime state ("WVCK" image).
///
///   magic "WVCK" | u32 version = 1 | section cells | section allocations |
///   section resumption | section locks | section config
///
/// Every section is a u64 byte length followed by its payload; all integers
/// are little-endian. The config section carries the tapestry config text
/// the state belongs to (empty when the runtime was built in code).
inline constexpr std::uint32_t kImageVersion = 1;

Bytes save_image(const Runtime& rt, std::string_view config_text = {});

/// Loads state saved from a structurally identical runtime (same strings).
/// Live checkpoints of `rt` are discarded. Throws CorruptImage.
void load_image(Runtime& rt, std::span<const std::uint8_t> image);

/// Extracts the embedded config text without touching any runtime.
std::string image_config(std::span<const std::uint8_t> image);

void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
Bytes read_file(const std::string& path);

}  // namespace weaves
