#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <vector>

namespace weaves {

/// Dense integer handle, tagged so that bead ids and weave ids do not mix.
template <class Tag>
struct Id {
  using value_type = std::uint32_t;
  static constexpr value_type kInvalid = std::numeric_limits<value_type>::max();

  value_type value = kInvalid;

  constexpr Id() = default;
  constexpr explicit Id(value_type v) : value(v) {}

  constexpr bool valid() const { return value != kInvalid; }
  constexpr std::size_t index() const { return value; }

  friend constexpr auto operator<=>(Id, Id) = default;
  friend std::ostream& operator<<(std::ostream& os, Id id) {
    if (!id.valid()) return os << '-';
    return os << id.value;
  }
};

using ModuleId = Id<struct ModuleTag>;
using BeadId = Id<struct BeadTag>;
using WeaveId = Id<struct WeaveTag>;
using StringId = Id<struct StringTag>;
using CellId = Id<struct CellTag>;
using LockId = Id<struct LockTag>;
using CheckpointId = Id<struct CheckpointTag>;
using NodeId = Id<struct NodeTag>;

using Bytes = std::vector<std::uint8_t>;
using Address = std::uint64_t;

}  // namespace weaves

template <class Tag>
struct std::hash<weaves::Id<Tag>> {
  std::size_t operator()(weaves::Id<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
