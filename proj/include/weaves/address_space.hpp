#pragma once

#include <cstdint>

#include "weaves/ids.hpp"

namespace weaves {

/// Static split of an address space into a node-id field and a per-node
/// virtual-address field.
struct AddressSplit {
  unsigned total_bits = 0;
  unsigned vm_bits = 0;
  unsigned node_bits = 0;
  std::uint64_t per_node_bytes = 0;
  std::uint64_t max_nodes = 0;
};

/// Throws InvalidSplit unless 0 < vm_bits < total_bits <= 64.
AddressSplit partition_address_space(unsigned total_bits, unsigned vm_bits);

/// Disjoint slice of the abstract address space owned by one node. Bump
/// allocation only: addresses are never reused, so an address freed on one
/// node can never alias a live one anywhere.
class NodeRegion {
 public:
  NodeRegion() = default;
  NodeRegion(NodeId node, Address base, std::uint64_t extent);

  static NodeRegion for_node(NodeId node, const AddressSplit& split);

  NodeId node() const { return node_; }
  Address base() const { return base_; }
  std::uint64_t extent() const { return extent_; }
  Address cursor() const { return cursor_; }
  std::uint64_t hosted_bytes() const { return hosted_; }

  bool contains(Address a) const { return a >= base_ && a - base_ < extent_; }
  std::uint64_t free_bytes() const;

  /// Reserves `size` bytes (8-byte aligned). Throws RegionOverflow.
  Address allocate(std::uint64_t size);

  /// Accounts for state adopted from another region (migration).
  void host(std::uint64_t bytes);
  void unhost(std::uint64_t bytes);

  void set_cursor(Address cursor) { cursor_ = cursor; }

 private:
  NodeId node_{0};
  Address base_ = 0;
  std::uint64_t extent_ = 0;
  Address cursor_ = 0;
  std::uint64_t hosted_ = 0;
};

}  // namespace weaves
