#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "weaves/config.hpp"
#include "weaves/error.hpp"
#include "weaves/runtime.hpp"
#include "weaves/value.hpp"

using namespace weaves;

namespace {

StepStatus noop(StringContext&) { return StepStatus::Finished; }

// Calls "touch" in the shared bead once per step until `limit` calls.
StepStatus caller(StringContext& c) {
  c.call("touch", {});
  auto n = c.read_i64("calls") + 1;
  c.write_i64("calls", n);
  return n >= c.read_i64("limit") ? StepStatus::Finished : StepStatus::Continue;
}

struct SharedSetup {
  Runtime rt;
  std::vector<WeaveId> weaves;
  BeadId shared;

  SharedSetup(std::size_t strings, std::int64_t limit, std::uint32_t quantum, bool nested = false) {
    rt.set_quantum(quantum);
    ModuleDef s;
    s.name = "shared";
    s.globals.push_back({"hits", value::from_i64(0)});
    s.functions.push_back({"inner", "()->()", [](StringContext& c, std::span<const double>) {
                             c.write_i64("hits", c.read_i64("hits") + 1);
                             return std::vector<double>{};
                           }});
    s.functions.push_back({"touch", "()->()", [nested](StringContext& c, std::span<const double>) {
                             if (nested) {
                               // Zero once the other string finished and S is no longer shared.
                               const auto depth = c.shared_depth();
                               CHECK(depth <= 1);
                               c.call("inner", {});
                               CHECK(c.shared_depth() == depth);
                             }
                             return std::vector<double>{};
                           }});
    rt.register_module(s);
    ModuleDef w;
    w.name = "worker";
    w.globals.push_back({"calls", value::from_i64(0)});
    w.globals.push_back({"limit", value::from_i64(limit)});
    w.entries.push_back({"run", caller});
    rt.register_module(w);
    shared = rt.instantiate_bead("shared", "S");
    for (std::size_t i = 0; i < strings; ++i) {
      BeadId b = rt.instantiate_bead("worker", "A" + std::to_string(i));
      weaves.push_back(rt.define_weave({b, shared}, "W" + std::to_string(i)));
      rt.spawn_string(weaves.back(), "run");
    }
  }
};

std::vector<std::uint32_t> dispatch_order(const Runtime& rt) {
  std::vector<std::uint32_t> out;
  for (const auto& e : rt.trace())
    if (e.event == "dispatch") out.push_back(e.string.value);
  return out;
}

}  // namespace

TEST_CASE("equivalence classes: solver pairs, disjoint, chain") {
  {
    Runtime rt;
    build_tapestry(rt, load_tapestry_config(WEAVES_SOURCE_DIR "/configs/solver_pairs.conf"));
    const auto& cls = rt.classes().classes;
    REQUIRE(cls.size() == 2);
    CHECK(cls[0] == std::vector<StringId>{StringId(0), StringId(1)});
    CHECK(cls[1] == std::vector<StringId>{StringId(2), StringId(3)});
  }
  Runtime rt;
  ModuleDef d;
  d.name = "m";
  d.entries.push_back({"main", noop});
  rt.register_module(d);
  std::vector<BeadId> b;
  for (int i = 0; i < 5; ++i) b.push_back(rt.instantiate_bead("m", "B" + std::to_string(i)));
  rt.spawn_string(rt.define_weave({b[0], b[1]}, "A"), "main");
  rt.spawn_string(rt.define_weave({b[1], b[2]}, "B"), "main");
  rt.spawn_string(rt.define_weave({b[2], b[3]}, "C"), "main");
  rt.spawn_string(rt.define_weave({b[4]}, "D"), "main");
  const auto& cls = rt.classes().classes;
  REQUIRE(cls.size() == 2);
  CHECK(cls[0].size() == 3);
  CHECK(cls[1] == std::vector<StringId>{StringId(3)});
}

TEST_CASE("equivalence classes match the transitive closure oracle") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    auto m = oracle::random_tapestry_model(seed, 8, 40, 25);
    Runtime rt;
    auto weaves = oracle::build_model(rt, m);
    std::mt19937_64 rng(seed);
    std::size_t n = 1 + rng() % 50;
    for (std::size_t i = 0; i < n; ++i) rt.spawn_string(weaves[rng() % weaves.size()], "main");
    CHECK(rt.classes().classes == oracle::closure_classes(rt.tapestry()));
  }
}

TEST_CASE("two singleton strings with quantum 1 alternate strictly") {
  Runtime rt;
  rt.set_quantum(1);
  ModuleDef d;
  d.name = "m";
  d.globals.push_back({"n", value::from_i64(0)});
  d.entries.push_back({"run", [](StringContext& c) {
                         auto n = c.read_i64("n") + 1;
                         c.write_i64("n", n);
                         return n >= 6 ? StepStatus::Finished : StepStatus::Continue;
                       }});
  rt.register_module(d);
  rt.spawn_string(rt.define_weave({rt.instantiate_bead("m", "A")}, "WA"), "run");
  rt.spawn_string(rt.define_weave({rt.instantiate_bead("m", "B")}, "WB"), "run");
  CHECK(rt.run().outcome == RunOutcome::Finished);
  auto order = dispatch_order(rt);
  REQUIRE(order.size() == 12);
  for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i] == i % 2);
}

TEST_CASE("no intra-class switch while a string is parked inside a shared bead") {
  Runtime rt;
  rt.set_quantum(1);
  ModuleDef s;
  s.name = "shared";
  s.globals.push_back({"inside", value::from_i64(0)});
  s.entries.push_back({"main", noop});
  rt.register_module(s);
  ModuleDef w;
  w.name = "worker";
  w.globals.push_back({"dummy", value::from_i64(0)});
  w.entries.push_back({"run", [](StringContext& c) {
                         auto& f = c.frame();
                         BeadId shared = *c.runtime().tapestry().find_bead("S");
                         if (f.pc == 0) {
                           c.enter(shared);
                           c.write_i64("inside", c.read_i64("inside") + 1);
                           CHECK(c.read_i64("inside") == 1);
                         } else if (f.pc == 4) {
                           c.write_i64("inside", c.read_i64("inside") - 1);
                           c.exit();
                         } else if (f.pc == 6) {
                           return StepStatus::Finished;
                         }
                         ++f.pc;
                         return StepStatus::Continue;
                       }});
  rt.register_module(w);
  BeadId shared = rt.instantiate_bead("shared", "S");
  for (int i = 0; i < 2; ++i)
    rt.spawn_string(rt.define_weave({rt.instantiate_bead("worker", "A" + std::to_string(i)), shared},
                                    "W" + std::to_string(i)),
                    "run");
  CHECK(rt.run().outcome == RunOutcome::Finished);
  CHECK(rt.max_shared_occupancy() == 1);
  auto order = dispatch_order(rt);
  // The first string stays pinned for its four steps inside S.
  REQUIRE(order.size() >= 5);
  for (int i = 0; i < 5; ++i) CHECK(order[i] == 0);
  bool pinned = false;
  for (const auto& e : rt.trace()) pinned |= e.reason == "pinned";
  CHECK(pinned);
}

TEST_CASE("continuation yield after a shared call lets the peer run") {
  SharedSetup s(2, 5, 64);
  CHECK(s.rt.run().outcome == RunOutcome::Finished);
  auto order = dispatch_order(s.rt);
  REQUIRE(order.size() == 10);
  for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i] == i % 2);
  CHECK(s.rt.max_shared_occupancy() == 1);
}

TEST_CASE("nested shared calls yield only at the outermost exit") {
  SharedSetup s(2, 4, 64, true);
  CHECK(s.rt.run().outcome == RunOutcome::Finished);
  std::size_t continuations = 0;
  for (const auto& e : s.rt.trace()) continuations += e.event == "continuation";
  // The last call of each string finishes it instead of yielding.
  CHECK(continuations == 6);
  CHECK(s.rt.read_i64(s.weaves[0], "hits") == 8);
}

TEST_CASE("three same-class strings progress fairly") {
  SharedSetup s(3, 10000, 64);
  std::vector<std::int64_t> counts;
  while (s.rt.dispatch_once()) {
    bool done = false;
    for (const auto& st : s.rt.tapestry().strings()) done |= st.state.status == StringStatus::Finished;
    if (done) {
      for (auto w : s.weaves) counts.push_back(s.rt.read_i64(w, "calls"));
      break;
    }
  }
  REQUIRE(counts.size() == 3);
  auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  CHECK(double(*lo) >= 0.95 * double(*hi));
}

TEST_CASE("two solver pairs tapestry under seeded scheduling: all finish, no shared re-entry") {
  for (std::uint64_t seed : {1, 2, 3}) {
    SchedulerConfig sc;
    sc.policy = SchedulingPolicy::SeededRandom;
    sc.seed = seed;
    sc.quantum = 3;
    RuntimeConfig rc;
    rc.scheduler = sc;
    Runtime rt(rc);
    build_tapestry(rt, load_tapestry_config(WEAVES_SOURCE_DIR "/configs/solver_pairs.conf"));
    CHECK(rt.run().outcome == RunOutcome::Finished);
    for (const auto& s : rt.tapestry().strings()) CHECK(s.state.status == StringStatus::Finished);
    CHECK(rt.max_shared_occupancy() <= 1);
  }
}

TEST_CASE("locks: uncontended acquisition and bad release") {
  Runtime rt;
  ModuleDef d;
  d.name = "m";
  d.entries.push_back({"run", [](StringContext& c) {
                         if (!c.acquire("L")) return StepStatus::Blocked;
                         c.release("L");
                         CHECK_THROWS_AS(c.release("L"), Error);
                         return StepStatus::Finished;
                       }});
  rt.register_module(d);
  rt.spawn_string(rt.define_weave({rt.instantiate_bead("m", "A")}, "W"), "run");
  CHECK(rt.run().outcome == RunOutcome::Finished);
  CHECK(rt.locks().history().size() == 1);
  CHECK(rt.recoveries() == 0);
}

TEST_CASE("wait graph cycle detection matches the exhaustive oracle") {
  CHECK_FALSE(detect_deadlock(std::vector<WaitEdge>{}));
  std::vector<WaitEdge> two{{StringId(0), LockId(1), StringId(1)}, {StringId(1), LockId(0), StringId(0)}};
  auto c = detect_deadlock(two);
  REQUIRE(c);
  CHECK(c->front().waiter == StringId(0));
  CHECK(oracle::is_cycle_in(*c, two));
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    std::mt19937_64 rng(seed);
    std::uint32_t n = 2 + rng() % 19, locks = 1 + rng() % 10;
    std::vector<std::uint32_t> holder(locks);
    for (auto& h : holder) h = rng() % n;
    std::vector<WaitEdge> edges;
    for (std::uint32_t s = 0; s < n; ++s) {
      if (rng() % 3 == 0) continue;
      std::uint32_t l = rng() % locks;
      if (holder[l] == s) continue;
      edges.push_back({StringId(s), LockId(l), StringId(holder[l])});
    }
    auto found = detect_deadlock(edges);
    CHECK(found.has_value() == oracle::has_cycle_exhaustive(edges));
    if (found) {
      CHECK(oracle::is_cycle_in(*found, edges));
      for (const auto& e : *found) CHECK(found->front().waiter <= e.waiter);
    }
  }
}

TEST_CASE("two-lock deadlock: detected, victim rolled back, both complete") {
  Runtime rt;
  auto built = build_tapestry(rt, load_tapestry_config(WEAVES_SOURCE_DIR "/configs/deadlock.conf"));
  rt.set_quantum(1);
  CHECK(rt.run().outcome == RunOutcome::Finished);
  CHECK(rt.recoveries() == 1);
  CHECK(rt.read_i64(built.weaves["WA"], "count") == 1);
  CHECK(rt.read_i64(built.weaves["WB"], "count") == 1);
  bool rollback_a = false;
  for (const auto& e : rt.trace()) rollback_a |= e.event == "rollback" && e.string == StringId(0);
  CHECK(rollback_a);
}

TEST_CASE("seeded transfer workloads match the serial oracle") {
  std::uint64_t recovered = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto plan = oracle::random_transfer_plan(seed);
    auto run = oracle::run_transfers(plan, seed, 1 + seed % 3);
    CHECK(run.finished);
    CHECK(run.balances == oracle::serial_balances(plan));
    recovered += run.recoveries;
  }
  CHECK(recovered > 0);
}
