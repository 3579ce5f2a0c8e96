#include "weaves/apps/collective.hpp"

#include <string>

#include "weaves/error.hpp"
#include "weaves/value.hpp"

namespace weaves::apps {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t outgoing(std::uint64_t state, std::uint64_t round, std::uint64_t dst) {
  return mix(state ^ mix(round * 1315423911ull + dst));
}

std::uint64_t fold(std::uint64_t state, std::uint64_t src, std::uint64_t v) {
  return mix(state * 31 + v + src);
}

std::uint64_t initial_state(std::uint32_t rank) { return mix(rank + 1); }

StepStatus exchange_step(StringContext& ctx) {
  const auto rank = static_cast<std::uint32_t>(ctx.read_i64("rank"));
  const auto ranks = static_cast<std::uint32_t>(ctx.read_i64("ranks"));
  const auto rounds = ctx.read_i64("rounds");
  Frame& f = ctx.frame();
  const std::int64_t round = ctx.read_i64("round");
  if (round >= rounds) return StepStatus::Finished;
  const std::uint64_t state = value::to_u64(ctx.read("state"));
  if (f.pc == 0) {
    for (std::uint32_t d = 0; d < ranks; ++d)
      if (d != rank)
        ctx.send(rank * ranks + d, value::from_u64(outgoing(state, static_cast<std::uint64_t>(round), d)));
    f.pc = 1;
    return StepStatus::Continue;
  }
  bool all = true;
  for (std::uint32_t s = 0; s < ranks; ++s) {
    if (s == rank) continue;
    std::string key = "in" + std::to_string(s);
    if (f.locals.count(key)) continue;
    if (auto m = ctx.try_recv(s * ranks + rank))
      f.locals[key] = *m;
    else
      all = false;
  }
  if (!all) return StepStatus::Blocked;  // woken when the network delivers
  std::uint64_t next = state;
  for (std::uint32_t s = 0; s < ranks; ++s) {
    if (s == rank) continue;
    std::string key = "in" + std::to_string(s);
    next = fold(next, s, value::to_u64(f.locals.at(key)));
    f.locals.erase(key);
  }
  ctx.write("state", value::from_u64(next));
  ctx.write_i64("round", round + 1);
  f.pc = 0;
  return StepStatus::Continue;
}

}  // namespace

GridConfig collective_grid_config(const CollectiveConfig& cfg) {
  GridConfig gc;
  gc.ranks = cfg.ranks;
  gc.nodes = cfg.ranks * 2;  // spare nodes for remapped restores
  gc.network = cfg.network;
  gc.steps_per_tick = cfg.steps_per_tick;
  gc.scheduler.record_trace = false;
  return gc;
}

void build_collective(Grid& grid, std::uint32_t rounds) {
  grid.connect_all();
  for (std::uint32_t r = 0; r < grid.ranks(); ++r) {
    Runtime& rt = grid.rank(r);
    ModuleDef m;
    m.name = "exchange";
    m.globals = {{"rank", value::from_i64(r)},
                 {"ranks", value::from_i64(grid.ranks())},
                 {"rounds", value::from_i64(rounds)},
                 {"round", value::from_i64(0)},
                 {"state", value::from_u64(initial_state(r))}};
    m.entries = {{"main", exchange_step}};
    rt.register_module(std::move(m));
    BeadId b = rt.instantiate_bead("exchange", "x" + std::to_string(r));
    WeaveId w = rt.define_weave({b}, "rank" + std::to_string(r));
    rt.spawn_string(w, "main");
  }
}

std::vector<std::uint64_t> collective_states(const Grid& grid) {
  std::vector<std::uint64_t> out;
  for (std::uint32_t r = 0; r < grid.ranks(); ++r) {
    const Runtime& rt = grid.rank(r);
    auto w = rt.tapestry().find_weave("rank" + std::to_string(r));
    if (!w) throw Error(ErrorCode::UnknownWeave, "rank weave missing");
    out.push_back(value::to_u64(rt.read(*w, "state")));
  }
  return out;
}

std::vector<std::uint64_t> collective_oracle(std::uint32_t ranks, std::uint32_t rounds) {
  std::vector<std::uint64_t> s(ranks);
  for (std::uint32_t r = 0; r < ranks; ++r) s[r] = initial_state(r);
  for (std::uint32_t k = 0; k < rounds; ++k) {
    std::vector<std::uint64_t> next(ranks);
    for (std::uint32_t r = 0; r < ranks; ++r) {
      std::uint64_t v = s[r];
      for (std::uint32_t src = 0; src < ranks; ++src)
        if (src != r) v = fold(v, src, outgoing(s[src], k, r));
      next[r] = v;
    }
    s = next;
  }
  return s;
}

CollectiveRun run_collective(const CollectiveConfig& cfg, std::optional<std::uint64_t> checkpoint_tick,
                             const std::map<std::uint32_t, NodeId>& remap) {
  const std::uint64_t cap = 200'000;
  CollectiveRun out;
  auto grid = std::make_unique<Grid>(collective_grid_config(cfg));
  build_collective(*grid, cfg.rounds);
  if (checkpoint_tick) {
    while (grid->now() < *checkpoint_tick && !grid->finished()) grid->tick();
    GridCheckpoint cp = grid->partial_checkpoint();
    out.dropped_at_checkpoint = cp.dropped_in_flight;
    // A fresh grid stands in for the restarted application.
    grid = std::make_unique<Grid>(collective_grid_config(cfg));
    build_collective(*grid, cfg.rounds);
    grid->restore(GridCheckpoint::from_bytes(cp.to_bytes()), remap);
  }
  if (!grid->run(cap)) throw Error(ErrorCode::NoConvergence, "collective did not finish within the tick cap");
  out.states = collective_states(*grid);
  out.ticks = grid->now();
  out.retransmissions = grid->transport().stats().retransmissions;
  return out;
}

}  // namespace weaves::apps
