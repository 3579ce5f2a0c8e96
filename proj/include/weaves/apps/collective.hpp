#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "weaves/grid.hpp"

namespace weaves::apps {

/// Emulated-rank all-to-all exchange. Every rank runs one string that, per
/// round, sends a value to every other rank and folds what it receives
/// into its state. The final states depend only on the ordered contents of
/// each channel, so any schedule, loss pattern or restore yields the same
/// answer.
struct CollectiveConfig {
  std::uint32_t ranks = 4;
  std::uint32_t rounds = 8;
  std::uint32_t steps_per_tick = 4;
  NetworkConfig network;
};

GridConfig collective_grid_config(const CollectiveConfig& cfg);
/// Registers the module and spawns the exchange string on every rank.
void build_collective(Grid& grid, std::uint32_t rounds);
std::vector<std::uint64_t> collective_states(const Grid& grid);
/// Oracle: the same computation without any runtime or network.
std::vector<std::uint64_t> collective_oracle(std::uint32_t ranks, std::uint32_t rounds);

struct CollectiveRun {
  std::vector<std::uint64_t> states;
  std::uint64_t ticks = 0;
  std::uint64_t dropped_at_checkpoint = 0;
  std::uint64_t retransmissions = 0;
};

/// Runs straight through, or checkpoints at `checkpoint_tick`, rebuilds a
/// fresh grid (optionally with ranks moved to other nodes) and continues
/// from the checkpoint.
CollectiveRun run_collective(const CollectiveConfig& cfg, std::optional<std::uint64_t> checkpoint_tick = std::nullopt,
                             const std::map<std::uint32_t, NodeId>& remap = {});

}  // namespace weaves::apps
