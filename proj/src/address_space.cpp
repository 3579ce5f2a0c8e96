#include "weaves/address_space.hpp"

#include <algorithm>
#include <string>

#include "weaves/error.hpp"

namespace weaves {

namespace {
// Address 0 stays unused so that a zero cell can act as a null reference.
constexpr std::uint64_t kRegionHeader = 16;
}  // namespace

AddressSplit partition_address_space(unsigned total_bits, unsigned vm_bits) {
  if (total_bits > 64 || vm_bits == 0 || vm_bits >= total_bits)
    throw Error(ErrorCode::InvalidSplit, "need 0 < vm_bits < total_bits <= 64, got (" +
                                             std::to_string(total_bits) + ", " +
                                             std::to_string(vm_bits) + ")");
  AddressSplit s;
  s.total_bits = total_bits;
  s.vm_bits = vm_bits;
  s.node_bits = total_bits - vm_bits;
  s.per_node_bytes = std::uint64_t{1} << vm_bits;
  s.max_nodes = std::uint64_t{1} << s.node_bits;
  return s;
}

NodeRegion::NodeRegion(NodeId node, Address base, std::uint64_t extent)
    : node_(node), base_(base), extent_(extent), cursor_(base + (extent > kRegionHeader ? kRegionHeader : 0)) {}

NodeRegion NodeRegion::for_node(NodeId node, const AddressSplit& split) {
  if (node.value >= split.max_nodes)
    throw Error(ErrorCode::InvalidSplit,
                "node " + std::to_string(node.value) + " exceeds " + std::to_string(split.max_nodes) + " nodes");
  return NodeRegion(node, Address{node.value} << split.vm_bits, split.per_node_bytes);
}

std::uint64_t NodeRegion::free_bytes() const {
  std::uint64_t used = (cursor_ - base_) + hosted_;
  return used >= extent_ ? 0 : extent_ - used;
}

Address NodeRegion::allocate(std::uint64_t size) {
  std::uint64_t aligned = (std::max<std::uint64_t>(size, 1) + 7) & ~std::uint64_t{7};
  if (aligned > free_bytes())
    throw Error(ErrorCode::RegionOverflow, "node " + std::to_string(node_.value) + " region cannot fit " +
                                               std::to_string(aligned) + " bytes");
  Address a = cursor_;
  cursor_ += aligned;
  return a;
}

void NodeRegion::host(std::uint64_t bytes) {
  if (bytes > free_bytes())
    throw Error(ErrorCode::RegionOverflow, "node " + std::to_string(node_.value) + " cannot host " +
                                               std::to_string(bytes) + " more bytes");
  hosted_ += bytes;
}

void NodeRegion::unhost(std::uint64_t bytes) { hosted_ = bytes > hosted_ ? 0 : hosted_ - bytes; }

}  // namespace weaves
