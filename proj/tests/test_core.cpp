#include <doctest.h>

#include "oracles.hpp"
#include "weaves/error.hpp"
#include "weaves/runtime.hpp"
#include "weaves/value.hpp"

using namespace weaves;

namespace {

ModuleDef solver_def(std::string name = "solver") {
  ModuleDef d;
  d.name = std::move(name);
  d.globals.push_back({"x", value::from_i64(0)});
  d.entries.push_back({"main", [](StringContext&) { return StepStatus::Finished; }});
  return d;
}

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

}  // namespace

TEST_CASE("register_module: round trip and uniqueness") {
  Runtime rt;
  ModuleId id = rt.register_module(solver_def());
  REQUIRE(rt.tapestry().find_module("solver"));
  CHECK(*rt.tapestry().find_module("solver") == id);
  CHECK(code_of([&] { rt.register_module(solver_def()); }) == ErrorCode::DuplicateModule);
}

TEST_CASE("register_module: invalid definitions") {
  Runtime rt;
  ModuleDef dup = solver_def("d");
  dup.globals.push_back({"x", value::from_i64(1)});
  CHECK(code_of([&] { rt.register_module(dup); }) == ErrorCode::InvalidDefinition);
  ModuleDef empty;
  empty.name = "e";
  empty.globals.push_back({"x", value::from_i64(1)});
  CHECK(code_of([&] { rt.register_module(empty); }) == ErrorCode::InvalidDefinition);
}

TEST_CASE("instantiate_bead: separation and template initial values") {
  Runtime rt;
  rt.register_module(solver_def());
  BeadId a = rt.instantiate_bead("solver", "A");
  BeadId b = rt.instantiate_bead("solver", "B");
  WeaveId wa = rt.define_weave({a}, "WA");
  WeaveId wb = rt.define_weave({b}, "WB");
  CHECK(rt.read_i64(wa, "x") == 0);
  rt.write(wa, "x", value::from_i64(5));
  CHECK(rt.read_i64(wa, "x") == 5);
  CHECK(rt.read_i64(wb, "x") == 0);
  BeadId c = rt.instantiate_bead("solver", "C");
  CHECK(rt.read_i64(rt.define_weave({c}, "WC"), "x") == 0);
  CHECK(code_of([&] { rt.instantiate_bead("nope"); }) == ErrorCode::UnknownModule);
}

TEST_CASE("instantiate_bead: four beads, four data contexts, one code context") {
  Runtime rt;
  ModuleDef d = solver_def();
  d.functions.push_back({"f", "(f64)->(f64)", [](StringContext&, std::span<const double> a) {
                           return std::vector<double>{a[0] + 1};
                         }});
  rt.register_module(d);
  std::set<CellId> cells;
  std::set<const FunctionImpl*> code;
  for (int i = 0; i < 4; ++i) {
    BeadId b = rt.instantiate_bead("solver", "S" + std::to_string(i));
    for (const auto& [n, c] : rt.tapestry().bead(b).context) cells.insert(c);
    WeaveId w = rt.define_weave({b}, "W" + std::to_string(i));
    code.insert(rt.names().table(w).function("f").impl.get());
  }
  CHECK(cells.size() == 4);
  CHECK(code.size() == 1);
}

TEST_CASE("define_weave: shared bead, singleton and empty") {
  Runtime rt;
  rt.register_module(solver_def());
  ModuleDef med;
  med.name = "mediator";
  med.globals.push_back({"g", value::from_f64(0)});
  med.entries.push_back({"main", [](StringContext&) { return StepStatus::Finished; }});
  rt.register_module(med);
  BeadId s1 = rt.instantiate_bead("solver", "S1");
  BeadId s2 = rt.instantiate_bead("solver", "S2");
  BeadId m = rt.instantiate_bead("mediator", "M12");
  WeaveId w1 = rt.define_weave({s1, m}, "W1");
  WeaveId w2 = rt.define_weave({s2, m}, "W2");
  const auto& t1 = rt.names().table(w1);
  const auto& t2 = rt.names().table(w2);
  CHECK(t1.resolve("g") == t2.resolve("g"));
  CHECK(t1.resolve("x") != t2.resolve("x"));
  WeaveId single = rt.define_weave({s1}, "single");
  CHECK(rt.names().table(single).size() == 1);
  CHECK(code_of([&] { rt.define_weave({}, "empty"); }) == ErrorCode::EmptyWeave);
  CHECK(code_of([&] { rt.define_weave({BeadId(99)}, "bad"); }) == ErrorCode::UnknownBead);
}

TEST_CASE("define_weave: later beads shadow earlier ones with a diagnostic") {
  Runtime rt;
  rt.register_module(solver_def("a"));
  rt.register_module(solver_def("b"));
  BeadId x = rt.instantiate_bead("a", "X");
  BeadId y = rt.instantiate_bead("b", "Y");
  std::size_t before = rt.diagnostics().size();
  WeaveId w = rt.define_weave({x, y}, "W");
  CHECK(rt.names().table(w).resolve("x") == *rt.tapestry().bead(y).cell("x"));
  CHECK(rt.diagnostics().size() > before);
}

TEST_CASE("instantiate_bead never changes other beads and is unaffected by earlier writes") {
  Runtime rt;
  rt.register_module(solver_def());
  BeadId a = rt.instantiate_bead("solver", "A");
  WeaveId wa = rt.define_weave({a}, "WA");
  rt.write(wa, "x", value::from_i64(42));
  BeadId b = rt.instantiate_bead("solver", "B");
  CHECK(rt.read_i64(wa, "x") == 42);
  CHECK(rt.read_i64(rt.define_weave({b}, "WB"), "x") == 0);
}

TEST_CASE("spawn_string: ids in creation order and context frame copy") {
  Runtime rt;
  rt.register_module(solver_def());
  std::vector<StringId> ids;
  for (int i = 0; i < 4; ++i) {
    BeadId b = rt.instantiate_bead("solver", "S" + std::to_string(i));
    WeaveId w = rt.define_weave({b}, "W" + std::to_string(i));
    rt.write(w, "x", value::from_i64(i + 10));
    ids.push_back(rt.spawn_string(w, "main"));
  }
  for (std::uint32_t i = 0; i < 4; ++i) {
    CHECK(ids[i] == StringId(i));
    const auto& frame = rt.tapestry().string(ids[i]).context_frame;
    REQUIRE(frame.size() == 1);
    CHECK(value::to_i64(frame[0].second) == static_cast<std::int64_t>(i + 10));
  }
  CHECK(code_of([&] { rt.spawn_string(WeaveId(0), "bogus"); }) == ErrorCode::UnknownEntry);
  CHECK(code_of([&] { rt.spawn_string(WeaveId(9), "main"); }) == ErrorCode::UnknownWeave);
}

TEST_CASE("separation oracle: randomized tapestries") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto failure = oracle::check_separation(seed);
    INFO(failure.value_or(""));
    REQUIRE_FALSE(failure);
  }
}

TEST_CASE("thread and process models as degenerate tapestries") {
  Runtime rt;
  rt.register_module(solver_def());
  BeadId a = rt.instantiate_bead("solver", "A");
  BeadId b = rt.instantiate_bead("solver", "B");
  WeaveId shared = rt.define_weave({a}, "T");
  rt.spawn_string(shared, "main");
  rt.spawn_string(shared, "main");
  WeaveId p1 = rt.define_weave({b}, "P");
  rt.spawn_string(p1, "main");
  const auto& classes = rt.classes();
  REQUIRE(classes.classes.size() == 2);
  CHECK(classes.classes[0].size() == 2);
  CHECK(classes.classes[1].size() == 1);
}
