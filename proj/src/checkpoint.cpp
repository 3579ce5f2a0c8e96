#include "weaves/checkpoint.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "weaves/error.hpp"

namespace weaves {

CheckpointManager::CheckpointManager(Memory& memory, Tapestry& tapestry) : memory_(memory), tapestry_(tapestry) {}

std::vector<CellId> CheckpointManager::cells_in_scope(const CheckpointScope& scope) const {
  std::vector<CellId> out;
  if (scope.whole()) {
    for (std::size_t i = 0; i < memory_.cell_count(); ++i) {
      CellId id{static_cast<std::uint32_t>(i)};
      if (memory_.cell(id).live) out.push_back(id);
    }
    return out;
  }
  const auto& s = tapestry_.string(scope.string);
  std::set<BeadId> beads;
  std::set<CellId> cells;
  for (BeadId b : tapestry_.weave(s.weave).beads) {
    beads.insert(b);
    for (const auto& [name, cell] : tapestry_.bead(b).context) cells.insert(cell);
  }
  for (const auto& r : memory_.allocations())
    if (r.live && beads.count(r.bead)) cells.insert(r.cell);
  out.assign(cells.begin(), cells.end());
  return out;
}

CheckpointId CheckpointManager::take(CheckpointScope scope, CheckpointMode mode) {
  Checkpoint c;
  c.id = CheckpointId{static_cast<std::uint32_t>(checkpoints_.size())};
  c.scope = scope;
  c.mode = mode;
  c.alloc_watermark = memory_.next_sequence() - 1;
  c.cell_watermark = static_cast<std::uint32_t>(memory_.cell_count());
  if (scope.whole()) {
    for (const auto& s : tapestry_.strings())
      if (s.state.status != StringStatus::Detached) c.resumption.emplace_back(s.id, s.state);
    if (capture_extension_) c.extension = capture_extension_();
  } else {
    const auto& s = tapestry_.string(scope.string);
    if (s.state.status == StringStatus::Detached)
      throw Error(ErrorCode::StaleCheckpoint, "string " + std::to_string(s.id.value) + " has left this node");
    c.resumption.emplace_back(s.id, s.state);
  }
  if (mode == CheckpointMode::Naive) {
    for (CellId id : cells_in_scope(scope)) {
      const Cell& cell = memory_.cell(id);
      c.saved.emplace(id, SavedCell{cell.value, cell.live});
    }
  } else {
    live_cow_.push_back(c.id);
  }
  checkpoints_.push_back(std::move(c));
  return checkpoints_.back().id;
}

void CheckpointManager::before_write(CellId id, const Cell& current, StringId writer) {
  for (CheckpointId cid : live_cow_) {
    Checkpoint& c = checkpoints_[cid.index()];
    if (id.value >= c.cell_watermark) continue;
    if (!c.scope.whole() && c.scope.string != writer) continue;
    c.saved.try_emplace(id, SavedCell{current.value, current.live});
  }
}

Checkpoint& CheckpointManager::get_mut(CheckpointId id) {
  if (!id.valid() || id.index() >= checkpoints_.size() || !checkpoints_[id.index()].live)
    throw Error(ErrorCode::UnknownCheckpoint, "checkpoint " + std::to_string(id.value));
  return checkpoints_[id.index()];
}

const Checkpoint& CheckpointManager::get(CheckpointId id) const {
  return const_cast<CheckpointManager*>(this)->get_mut(id);
}

bool CheckpointManager::is_live(CheckpointId id) const {
  return id.valid() && id.index() < checkpoints_.size() && checkpoints_[id.index()].live;
}

std::vector<CheckpointId> CheckpointManager::live_ids() const {
  std::vector<CheckpointId> out;
  for (const auto& c : checkpoints_)
    if (c.live) out.push_back(c.id);
  return out;
}

void CheckpointManager::restore(CheckpointId id) {
  Checkpoint& c = get_mut(id);
  for (const auto& [sid, state] : c.resumption) {
    if (tapestry_.string(sid).state.status == StringStatus::Detached)
      throw Error(ErrorCode::StaleCheckpoint, "string " + std::to_string(sid.value) + " no longer lives here");
  }

  // Garbage-collect what was allocated after the checkpoint.
  std::vector<Address> newer;
  for (const auto& r : memory_.allocations())
    if (r.live && r.sequence > c.alloc_watermark && (c.scope.whole() || r.by_string == c.scope.string))
      newer.push_back(r.start);
  for (Address a : newer) memory_.release(*memory_.allocation_at(a));

  // Writes go through the observer so that other live checkpoints keep
  // their own first-write values.
  std::vector<CellId> order;
  order.reserve(c.saved.size());
  for (const auto& [cell, saved] : c.saved) order.push_back(cell);
  std::sort(order.begin(), order.end());
  for (CellId cell : order) {
    const SavedCell& saved = c.saved.at(cell);
    if (!saved.live) continue;
    const Cell& now = memory_.cell(cell);
    if (now.live && now.value == saved.value) continue;
    memory_.resurrect(cell, saved.value);
  }

  for (const auto& [sid, state] : c.resumption) {
    auto& s = tapestry_.string_mut(sid);
    s.state = state;
    if (s.state.status == StringStatus::Running) s.state.status = StringStatus::Ready;
  }
  if (c.scope.whole() && apply_extension_ && !c.extension.empty()) apply_extension_(c.extension);
  if (after_restore_) after_restore_(c);
}

void CheckpointManager::discard(CheckpointId id) {
  Checkpoint& c = get_mut(id);
  c.live = false;
  c.saved.clear();
  c.resumption.clear();
  c.extension.clear();
  std::erase(live_cow_, id);
}

}  // namespace weaves
