#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "weaves/ids.hpp"
#include "weaves/memory.hpp"
#include "weaves/tapestry.hpp"

namespace weaves {

enum class CheckpointMode : std::uint8_t { Naive, Cow };

/// Either one string (its weave's cells, its heap, its resumption) or the
/// whole tapestry.
struct CheckpointScope {
  StringId string;

  static CheckpointScope whole_tapestry() { return {}; }
  static CheckpointScope of(StringId s) { return {s}; }
  bool whole() const { return !string.valid(); }
};

struct SavedCell {
  Bytes value;
  bool live = true;
};

struct Checkpoint {
  CheckpointId id;
  CheckpointScope scope;
  CheckpointMode mode = CheckpointMode::Cow;
  /// Naive: eager snapshot of every in-scope cell. Cow: pre-write values of
  /// the cells modified since the checkpoint, filled on first write.
  std::unordered_map<CellId, SavedCell> saved;
  std::vector<std::pair<StringId, Resumption>> resumption;
  std::uint64_t alloc_watermark = 0;  // allocations with a larger sequence are newer
  std::uint32_t cell_watermark = 0;   // cells with a larger id did not exist yet
  Bytes extension;                    // scheduler-side state (lock table) for whole scope
  bool live = true;

  std::size_t log_size() const { return saved.size(); }
};

/// Takes, logs and restores checkpoints over one node's Memory and Tapestry.
/// Installed as the Memory's write observer.
class CheckpointManager : public WriteObserver {
 public:
  CheckpointManager(Memory& memory, Tapestry& tapestry);

  CheckpointId take(CheckpointScope scope, CheckpointMode mode);
  /// Throws UnknownCheckpoint, StaleCheckpoint.
  void restore(CheckpointId id);
  void discard(CheckpointId id);

  const Checkpoint& get(CheckpointId id) const;
  bool is_live(CheckpointId id) const;
  std::vector<CheckpointId> live_ids() const;
  std::size_t live_cow_count() const { return live_cow_.size(); }

  /// Copy-on-write interception: saves the pre-write value once per
  /// (checkpoint, cell) for every live cow checkpoint whose scope covers
  /// the writer.
  void before_write(CellId id, const Cell& current, StringId writer) override;

  /// Lets the scheduler fold its own state into whole-tapestry checkpoints.
  void set_extension(std::function<Bytes()> capture, std::function<void(const Bytes&)> apply) {
    capture_extension_ = std::move(capture);
    apply_extension_ = std::move(apply);
  }

  /// Called after any restore so the owner can rebuild derived state.
  void set_after_restore(std::function<void(const Checkpoint&)> hook) { after_restore_ = std::move(hook); }

 private:
  Checkpoint& get_mut(CheckpointId id);
  std::vector<CellId> cells_in_scope(const CheckpointScope& scope) const;

  Memory& memory_;
  Tapestry& tapestry_;
  std::vector<Checkpoint> checkpoints_;
  std::vector<CheckpointId> live_cow_;
  std::function<Bytes()> capture_extension_;
  std::function<void(const Bytes&)> apply_extension_;
  std::function<void(const Checkpoint&)> after_restore_;
};

}  // namespace weaves
