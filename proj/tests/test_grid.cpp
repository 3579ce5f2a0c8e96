#include <doctest.h>

#include "weaves/address_space.hpp"
#include "weaves/apps/collective.hpp"
#include "weaves/apps/pde.hpp"
#include "weaves/config.hpp"
#include "weaves/error.hpp"
#include "weaves/grid.hpp"
#include "weaves/islands.hpp"
#include "weaves/transport.hpp"
#include "weaves/value.hpp"

using namespace weaves;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

std::vector<std::uint64_t> pump(Transport& t, std::uint32_t channel, std::size_t expect, std::size_t max_ticks) {
  std::vector<std::uint64_t> got;
  for (std::size_t tick = 0; tick < max_ticks && got.size() < expect; ++tick) {
    t.deliver_step();
    while (auto p = t.try_recv(channel)) got.push_back(value::to_u64(*p));
  }
  return got;
}

}  // namespace

TEST_CASE("address space partition arithmetic") {
  auto a = partition_address_space(64, 40);
  CHECK(a.per_node_bytes == (std::uint64_t{1} << 40));
  CHECK(a.max_nodes == 16'777'216);
  auto b = partition_address_space(36, 32);
  CHECK(b.per_node_bytes == 4'294'967'296ULL);
  CHECK(b.max_nodes == 16);
  auto c = partition_address_space(8, 4);
  CHECK(c.per_node_bytes == 16);
  CHECK(c.max_nodes == 16);
  for (unsigned total = 2; total <= 63; ++total)
    for (unsigned vm = 1; vm < total; ++vm) {
      auto s = partition_address_space(total, vm);
      CHECK(s.per_node_bytes * s.max_nodes == (std::uint64_t{1} << total));
    }
  CHECK(code_of([] { partition_address_space(40, 40); }) == ErrorCode::InvalidSplit);
  CHECK(code_of([] { partition_address_space(64, 0); }) == ErrorCode::InvalidSplit);
}

TEST_CASE("node regions are disjoint") {
  auto split = partition_address_space(16, 8);
  auto r0 = NodeRegion::for_node(NodeId(0), split);
  auto r1 = NodeRegion::for_node(NodeId(1), split);
  Address a = r0.allocate(200);
  Address b = r1.allocate(200);
  CHECK_FALSE(r1.contains(a));
  CHECK_FALSE(r0.contains(b));
  CHECK(code_of([&] { r0.allocate(200); }) == ErrorCode::RegionOverflow);
}

TEST_CASE("transport: lossless in order without retransmission") {
  Transport t;
  t.add_channel({0, 0, 1});
  for (std::uint64_t i = 0; i < 100; ++i) t.send(0, value::from_u64(i));
  auto got = pump(t, 0, 100, 1000);
  REQUIRE(got.size() == 100);
  for (std::uint64_t i = 0; i < 100; ++i) CHECK(got[i] == i);
  CHECK(t.stats().retransmissions == 0);
  CHECK(code_of([&] { t.send(9, {}); }) == ErrorCode::UnknownChannel);
}

TEST_CASE("transport: loss 0.3 and duplication deliver exactly once in order") {
  NetworkConfig cfg;
  cfg.loss = 0.3;
  cfg.duplicate = 0.2;
  cfg.max_delay = 4;
  cfg.seed = 5;
  Transport t(cfg);
  t.add_channel({0, 0, 1});
  for (std::uint64_t i = 0; i < 1000; ++i) t.send(0, value::from_u64(i));
  auto got = pump(t, 0, 1000, 200000);
  REQUIRE(got.size() == 1000);
  for (std::uint64_t i = 0; i < 1000; ++i) CHECK(got[i] == i);
  for (int i = 0; i < 100; ++i) t.deliver_step();
  CHECK_FALSE(t.try_recv(0));
  CHECK(t.stats().dropped > 0);
  CHECK(t.stats().retransmissions > 0);
  CHECK(t.stats().duplicates_suppressed > 0);
}

TEST_CASE("collective: checkpoint and restore equal straight-through and the oracle") {
  apps::CollectiveConfig cfg;
  cfg.ranks = 3;
  cfg.rounds = 5;
  cfg.network.loss = 0.1;
  cfg.network.seed = 4;
  auto oracle = apps::collective_oracle(cfg.ranks, cfg.rounds);
  auto straight = apps::run_collective(cfg);
  CHECK(straight.states == oracle);
  for (std::uint64_t tick : {1, 3, 6, 10}) {
    auto restored = apps::run_collective(cfg, tick);
    CHECK(restored.states == oracle);
  }
  auto remapped = apps::run_collective(cfg, 4, {{0, NodeId(4)}, {2, NodeId(5)}});
  CHECK(remapped.states == oracle);
}

TEST_CASE("islands: solver pairs topology, hints and closure") {
  Runtime rt;
  auto built = build_tapestry(rt, load_tapestry_config(WEAVES_SOURCE_DIR "/configs/solver_pairs.conf"));
  auto islands = identify_islands(rt);
  REQUIRE(islands.size() == 2);
  CHECK(islands[0].beads == std::set<BeadId>{built.beads["S1"], built.beads["S2"], built.beads["M12"]});
  CHECK(islands[1].beads == std::set<BeadId>{built.beads["S3"], built.beads["S4"], built.beads["M34"]});
  CHECK(islands[0].strings.size() == 2);
  auto hinted = identify_islands(rt, {{built.beads["S3"], built.beads["S4"], built.beads["M34"]}});
  REQUIRE(hinted.size() == 1);
  CHECK(code_of([&] { identify_islands(rt, {{built.beads["S1"], built.beads["M12"]}}); }) == ErrorCode::NotClosed);
}

TEST_CASE("islands: fully connected tapestry is one island") {
  Runtime rt;
  ModuleDef d;
  d.name = "m";
  d.entries.push_back({"main", [](StringContext&) { return StepStatus::Finished; }});
  rt.register_module(d);
  std::vector<BeadId> b;
  for (int i = 0; i < 4; ++i) b.push_back(rt.instantiate_bead("m"));
  rt.define_weave({b[0], b[1]});
  rt.define_weave({b[1], b[2]});
  rt.define_weave({b[2], b[3]});
  CHECK(identify_islands(rt).size() == 1);
}

TEST_CASE("migration keeps addresses, aliasing cells resolve without rewriting") {
  auto module = [] {
    ModuleDef d;
    d.name = "ptrs";
    d.globals.push_back({"ptr", value::from_u64(0)});
    d.globals.push_back({"ptr1", value::from_u64(0)});
    d.globals.push_back({"seen", value::from_i64(0)});
    d.entries.push_back({"main", [](StringContext& c) {
                           auto& f = c.frame();
                           if (f.pc == 0) {
                             Address a = c.alloc(8);
                             c.write("ptr", value::from_u64(a));
                             c.write("ptr1", value::from_u64(a));
                             c.write_at(a, value::from_i64(41));
                             f.pc = 1;
                             return StepStatus::Yield;
                           }
                           Address p = value::to_u64(c.read("ptr"));
                           c.write_at(p, value::from_i64(value::to_i64(c.read_at(p)) + 1));
                           Address q = value::to_u64(c.read("ptr1"));
                           c.write_i64("seen", value::to_i64(c.read_at(q)));
                           return StepStatus::Finished;
                         }});
    return d;
  };
  auto split = partition_address_space(64, 40);
  RuntimeConfig c0, c1;
  c0.region = NodeRegion::for_node(NodeId(0), split);
  c1.region = NodeRegion::for_node(NodeId(1), split);
  Runtime src(c0), dst(c1), bare(c1);
  src.register_module(module());
  dst.register_module(module());
  WeaveId w = src.define_weave({src.instantiate_bead("ptrs", "P")}, "W");
  src.spawn_string(w, "main");
  REQUIRE(src.dispatch_once());
  Address before = value::to_u64(src.read(w, "ptr"));
  auto islands = identify_islands(src);
  REQUIRE(islands.size() == 1);
  CHECK(code_of([&] { migrate_island(src, bare, islands[0]); }) == ErrorCode::MissingModule);
  auto moved = migrate_island(src, dst, islands[0]);
  CHECK(src.tapestry().string(StringId(0)).state.status == StringStatus::Detached);
  WeaveId w2 = moved.weaves.at(w);
  CHECK(value::to_u64(dst.read(w2, "ptr")) == before);
  CHECK(dst.run().outcome == RunOutcome::Finished);
  CHECK(dst.read_i64(w2, "seen") == 42);
}

TEST_CASE("PDE pair migrated mid-run matches the unmigrated run bit for bit") {
  auto [left, right] = apps::unit_problem(apps::SourceKind::One, 0.0, 0.0, 17);
  apps::MediatorConfig mc;
  auto plain = apps::run_pde_on_grid(left, right, mc, std::nullopt);
  auto moved = apps::run_pde_on_grid(left, right, mc, 7);
  CHECK(moved.final_rank == 1);
  CHECK(plain.final_rank == 0);
  CHECK(moved.result.interface == plain.result.interface);
  CHECK(moved.result.iterations == plain.result.iterations);
  CHECK(moved.result.left == plain.result.left);
  CHECK(moved.result.right == plain.result.right);
  CHECK(moved.result.history == plain.result.history);
}

TEST_CASE("grid config scenario: checkpoint and migration events") {
  auto cfg = load_tapestry_config(WEAVES_SOURCE_DIR "/configs/grid.conf");
  auto grid = build_grid(cfg);
  CHECK(grid->run(100000));
  CHECK(grid->last_checkpoint().has_value());
  bool migrated = false;
  for (const auto& line : grid->log()) migrated |= line.find("migrate") != std::string::npos;
  CHECK(migrated);
  auto cp = *grid->last_checkpoint();
  auto back = GridCheckpoint::from_bytes(cp.to_bytes());
  CHECK(back.images == cp.images);
  CHECK(back.endpoints == cp.endpoints);
  CHECK(back.tick == cp.tick);
}
