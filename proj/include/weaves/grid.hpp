#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "weaves/address_space.hpp"
#include "weaves/runtime.hpp"
#include "weaves/transport.hpp"

namespace weaves {

struct GridConfig {
  std::uint32_t ranks = 2;
  std::uint32_t nodes = 0;  // physical nodes; 0 means one per rank
  unsigned total_bits = 64;
  unsigned vm_bits = 40;
  NetworkConfig network;
  std::uint32_t steps_per_tick = 16;
  SchedulerConfig scheduler;
};

/// Scripted scenario event, applied at the start of its tick.
struct GridEvent {
  enum class Kind { Checkpoint, Restore, Migrate, Kill };
  Kind kind = Kind::Checkpoint;
  std::uint64_t tick = 0;
  NodeId node;                              // Kill
  std::uint32_t from_rank = 0;              // Migrate
  std::uint32_t to_rank = 0;                // Migrate
  std::vector<std::string> beads;           // Migrate: bead labels of the island
  std::map<std::uint32_t, NodeId> remap;    // Restore: rank -> new node
};

std::string_view to_string(GridEvent::Kind k);

/// Per-rank tapestry state plus transport endpoint state. In-flight packets
/// are not part of it.
struct GridCheckpoint {
  std::uint64_t tick = 0;
  std::vector<Bytes> images;     // per rank
  std::vector<Bytes> endpoints;  // per rank
  Bytes clock;
  std::vector<NodeId> placement;  // per rank
  std::uint64_t dropped_in_flight = 0;

  Bytes to_bytes() const;
  static GridCheckpoint from_bytes(std::span<const std::uint8_t> bytes);
};

/// Simulated grid: one Runtime per rank, each allocating from the address
/// region of its home node, all connected through one Transport and
/// advanced by a single logical clock.
class Grid {
 public:
  explicit Grid(GridConfig config);
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;
  ~Grid();

  const GridConfig& config() const { return config_; }
  std::uint32_t ranks() const { return config_.ranks; }
  Runtime& rank(std::uint32_t r);
  const Runtime& rank(std::uint32_t r) const;
  Transport& transport() { return transport_; }
  const Transport& transport() const { return transport_; }

  /// Channel id used between two ranks by connect_all.
  std::uint32_t channel_id(std::uint32_t src, std::uint32_t dst) const { return src * config_.ranks + dst; }
  /// Declares a channel for every ordered pair of distinct ranks.
  void connect_all();

  /// Node currently hosting a rank.
  NodeId node_of(std::uint32_t r) const { return transport_.node_of(r); }
  void kill(NodeId node);
  bool alive(std::uint32_t r) const { return !transport_.down(node_of(r)); }

  /// One tick: scripted events, network delivery and timers, then each live
  /// rank runs up to steps_per_tick steps.
  void tick();
  std::uint64_t now() const { return transport_.now(); }
  /// True once every live rank has no live strings.
  bool finished() const;
  /// Ticks until finished or `max_ticks`; returns whether it finished.
  bool run(std::uint64_t max_ticks);

  void schedule(GridEvent e) { events_.push_back(std::move(e)); }
  const std::vector<std::string>& log() const { return log_; }

  GridCheckpoint partial_checkpoint();
  /// Reloads every rank from `cp`, optionally moving ranks to other nodes.
  /// The network is emptied; the reliability layer recovers what was lost.
  void restore(const GridCheckpoint& cp, const std::map<std::uint32_t, NodeId>& remap = {});
  const std::optional<GridCheckpoint>& last_checkpoint() const { return last_checkpoint_; }

 private:
  class RankPort;

  void apply_event(const GridEvent& e);

  GridConfig config_;
  AddressSplit split_;
  Transport transport_;
  std::vector<std::unique_ptr<Runtime>> runtimes_;
  std::vector<std::unique_ptr<RankPort>> ports_;
  std::vector<GridEvent> events_;
  std::vector<std::string> log_;
  std::optional<GridCheckpoint> last_checkpoint_;
};

}  // namespace weaves
