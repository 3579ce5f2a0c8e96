#pragma once

#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weaves/ids.hpp"

namespace weaves {

struct LockRecord {
  LockId id;
  std::string name;
  StringId holder;
  std::deque<StringId> waiters;
};

/// One lock request: who asked, from which bead, and the checkpoint taken
/// just before the request so the string can be rolled back to it.
struct Acquisition {
  StringId string;
  BeadId bead;
  LockId lock;
  CheckpointId checkpoint;
};

class LockTable {
 public:
  LockId create(std::string name);
  /// Returns the existing lock of that name or creates it.
  LockId ensure(std::string_view name);
  std::optional<LockId> find(std::string_view name) const;
  /// Throws UnknownLock.
  const LockRecord& lock(LockId id) const;
  const std::vector<LockRecord>& locks() const { return locks_; }

  /// Grants the lock if free (or already held by `s`); otherwise queues `s`.
  bool request(StringId s, LockId id);
  /// Hands the lock to the first waiter, which is returned. Throws NotHolder.
  StringId release(StringId s, LockId id);
  /// Removes `s` from the waiters of `id`.
  void withdraw(StringId s, LockId id);

  std::vector<Acquisition>& history() { return history_; }
  const std::vector<Acquisition>& history() const { return history_; }

  Bytes serialize() const;
  void load(std::span<const std::uint8_t> bytes);

 private:
  LockRecord& get(LockId id);

  std::vector<LockRecord> locks_;
  std::map<std::string, LockId, std::less<>> names_;
  std::vector<Acquisition> history_;
};

/// waiter --lock--> holder
struct WaitEdge {
  StringId waiter;
  LockId lock;
  StringId holder;

  friend bool operator==(const WaitEdge&, const WaitEdge&) = default;
};

std::vector<WaitEdge> build_wait_graph(const LockTable& locks);

/// Finds one cycle in the wait graph, rotated to start at its lowest string
/// id. Returns nullopt when the graph is acyclic.
std::optional<std::vector<WaitEdge>> detect_deadlock(std::span<const WaitEdge> edges);

}  // namespace weaves
