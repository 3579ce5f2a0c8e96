#include "weaves/memory.hpp"

#include <algorithm>
#include <string>

#include "weaves/error.hpp"

namespace weaves {

namespace {
std::string hex(Address a) {
  static const char* digits = "0123456789abcdef";
  std::string s = "0x";
  bool started = false;
  for (int shift = 60; shift >= 0; shift -= 4) {
    unsigned d = (a >> shift) & 0xF;
    if (d || started || shift == 0) {
      s += digits[d];
      started = true;
    }
  }
  return s;
}
}  // namespace

Memory::Memory(NodeRegion region) : region_(region) {}

CellId Memory::create_cell(BeadId owner, Bytes initial) {
  Address a = region_.allocate(std::max<std::size_t>(initial.size(), 8));
  return adopt_cell(owner, std::move(initial), a, false);
}

CellId Memory::adopt_cell(BeadId owner, Bytes value, Address address, bool heap, bool live) {
  CellId id{static_cast<std::uint32_t>(cells_.size())};
  cells_.push_back(Cell{std::move(value), owner, address, live, heap});
  if (live) by_address_[address] = id;
  return id;
}

const Cell& Memory::cell(CellId id) const {
  if (id.index() >= cells_.size()) throw Error(ErrorCode::UnknownSymbol, "no cell " + std::to_string(id.value));
  return cells_[id.index()];
}

const Bytes& Memory::read(CellId id) const {
  const Cell& c = cell(id);
  if (!c.live) throw Error(ErrorCode::UnknownAddress, "read of freed cell at " + hex(c.address));
  return c.value;
}

void Memory::notify(CellId id, StringId writer) {
  if (observer_) observer_->before_write(id, cells_[id.index()], writer);
}

void Memory::write(CellId id, Bytes value, StringId writer) {
  const Cell& c = cell(id);
  if (!c.live) throw Error(ErrorCode::UnknownAddress, "write to freed cell at " + hex(c.address));
  notify(id, writer);
  cells_[id.index()].value = std::move(value);
}

void Memory::write_range(CellId id, std::size_t offset, std::span<const std::uint8_t> bytes, StringId writer) {
  const Cell& c = cell(id);
  if (!c.live) throw Error(ErrorCode::UnknownAddress, "write to freed cell at " + hex(c.address));
  if (offset + bytes.size() > c.value.size())
    throw Error(ErrorCode::InvalidArgument, "write past end of cell at " + hex(c.address));
  notify(id, writer);
  std::copy(bytes.begin(), bytes.end(), cells_[id.index()].value.begin() + static_cast<std::ptrdiff_t>(offset));
}

Address Memory::track_alloc(BeadId bead, std::uint64_t size, StringId by) {
  if (size == 0) throw Error(ErrorCode::InvalidArgument, "zero-size allocation");
  Address a = region_.allocate(size);
  adopt_allocation(bead, a, Bytes(size, 0), by);
  return a;
}

AllocationRecord& Memory::adopt_allocation(BeadId bead, Address start, Bytes contents, StringId by) {
  std::uint64_t size = contents.size();
  CellId cell = adopt_cell(bead, std::move(contents), start, true);
  alloc_index_[start] = allocs_.size();
  allocs_.push_back(AllocationRecord{bead, start, size, next_sequence_++, true, cell, by});
  return allocs_.back();
}

void Memory::track_free(Address start, StringId by) {
  auto it = alloc_index_.find(start);
  if (it == alloc_index_.end()) throw Error(ErrorCode::UnknownAddress, "free of untracked address " + hex(start));
  AllocationRecord& r = allocs_[it->second];
  if (!r.live) throw Error(ErrorCode::DoubleFree, "address " + hex(start) + " already freed");
  release(r, by);
}

void Memory::release(AllocationRecord& r, StringId by) {
  if (!r.live) return;
  notify(r.cell, by);
  Cell& c = cells_[r.cell.index()];
  c.live = false;
  c.value.clear();
  by_address_.erase(c.address);
  r.live = false;
}

void Memory::resurrect(CellId id, Bytes value, StringId by) {
  notify(id, by);
  Cell& c = cells_[id.index()];
  c.value = std::move(value);
  if (!c.live) {
    c.live = true;
    by_address_[c.address] = id;
    if (auto* r = allocation_at(c.address)) r->live = true;
  }
}

void Memory::evict(CellId id) {
  Cell& c = cells_[id.index()];
  if (c.heap) {
    if (auto* r = allocation_at(c.address)) r->live = false;
  }
  if (c.live) by_address_.erase(c.address);
  c.live = false;
  c.value.clear();
}

CellId Memory::cell_at(Address a) const {
  auto it = by_address_.find(a);
  if (it == by_address_.end()) throw Error(ErrorCode::UnknownAddress, "no live cell at " + hex(a));
  return it->second;
}

const AllocationRecord* Memory::allocation_at(Address a) const {
  auto it = alloc_index_.find(a);
  return it == alloc_index_.end() ? nullptr : &allocs_[it->second];
}

AllocationRecord* Memory::allocation_at(Address a) {
  auto it = alloc_index_.find(a);
  return it == alloc_index_.end() ? nullptr : &allocs_[it->second];
}

void Memory::load_state(std::vector<Cell> cells, std::vector<AllocationRecord> allocs, std::uint64_t next_sequence,
                        Address cursor) {
  cells_ = std::move(cells);
  allocs_ = std::move(allocs);
  next_sequence_ = next_sequence;
  region_.set_cursor(cursor);
  by_address_.clear();
  alloc_index_.clear();
  for (std::size_t i = 0; i < cells_.size(); ++i)
    if (cells_[i].live) by_address_[cells_[i].address] = CellId{static_cast<std::uint32_t>(i)};
  for (std::size_t i = 0; i < allocs_.size(); ++i) alloc_index_[allocs_[i].start] = i;
}

}  // namespace weaves
