#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "weaves/address_space.hpp"
#include "weaves/ids.hpp"

namespace weaves {

/// One addressable unit of global or heap state.
struct Cell {
  Bytes value;
  BeadId owner;
  Address address = 0;
  bool live = true;
  bool heap = false;
};

struct AllocationRecord {
  BeadId bead;
  Address start = 0;
  std::uint64_t size = 0;
  std::uint64_t sequence = 0;
  bool live = true;
  CellId cell;
  StringId by_string;  // string executing when the allocation happened, if any
};

/// Sees every cell mutation (write, free, resurrection) before it happens.
class WriteObserver {
 public:
  virtual ~WriteObserver() = default;
  virtual void before_write(CellId id, const Cell& current, StringId writer) = 0;
};

/// Cell store for one node: global cells of beads plus tracked heap
/// allocations, all placed in the node's region.
class Memory {
 public:
  explicit Memory(NodeRegion region = NodeRegion(NodeId{0}, 0, std::uint64_t{1} << 40));

  CellId create_cell(BeadId owner, Bytes initial);
  /// Places a cell at a caller-chosen address (migration, image load).
  CellId adopt_cell(BeadId owner, Bytes value, Address address, bool heap, bool live = true);

  const Cell& cell(CellId id) const;
  std::size_t cell_count() const { return cells_.size(); }
  const Bytes& read(CellId id) const;
  void write(CellId id, Bytes value, StringId writer = {});
  void write_range(CellId id, std::size_t offset, std::span<const std::uint8_t> bytes, StringId writer = {});

  Address track_alloc(BeadId bead, std::uint64_t size, StringId by = {});
  void track_free(Address start, StringId by = {});
  AllocationRecord& adopt_allocation(BeadId bead, Address start, Bytes contents, StringId by = {});

  /// Cell whose start address is `a`. Throws UnknownAddress.
  CellId cell_at(Address a) const;
  const AllocationRecord* allocation_at(Address a) const;
  AllocationRecord* allocation_at(Address a);
  std::span<const AllocationRecord> allocations() const { return allocs_; }
  std::uint64_t next_sequence() const { return next_sequence_; }

  /// Frees an allocation regardless of liveness bookkeeping of the caller.
  void release(AllocationRecord& record, StringId by = {});
  /// Re-establishes a freed cell (and its allocation record) with `value`.
  void resurrect(CellId id, Bytes value, StringId by = {});
  /// Drops a cell without observer notification (state moved elsewhere).
  void evict(CellId id);

  NodeRegion& region() { return region_; }
  const NodeRegion& region() const { return region_; }

  void set_observer(WriteObserver* observer) { observer_ = observer; }

  /// Raw restore used by image loading; bypasses observers.
  void load_state(std::vector<Cell> cells, std::vector<AllocationRecord> allocs, std::uint64_t next_sequence,
                  Address cursor);

 private:
  void notify(CellId id, StringId writer);

  NodeRegion region_;
  std::vector<Cell> cells_;
  std::vector<AllocationRecord> allocs_;
  std::unordered_map<Address, CellId> by_address_;
  std::unordered_map<Address, std::size_t> alloc_index_;
  std::uint64_t next_sequence_ = 1;
  WriteObserver* observer_ = nullptr;
};

}  // namespace weaves
