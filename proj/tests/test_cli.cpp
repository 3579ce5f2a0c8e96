#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "weaves/config.hpp"
#include "weaves/error.hpp"
#include "weaves/monitor.hpp"
#include "weaves/runtime.hpp"
#include "weaves/value.hpp"

using namespace weaves;

namespace {

const char* kConfigs[] = {"solver_pairs.conf", "deadlock.conf", "grid.conf"};

std::string path_of(const std::string& name) { return std::string(WEAVES_SOURCE_DIR) + "/configs/" + name; }

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

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult cli(const std::string& args) {
  auto tmp = std::filesystem::temp_directory_path() / "weaves_cli_test.out";
  std::string cmd = std::string(WEAVES_CLI) + " " + args + " > " + tmp.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(tmp);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

}  // namespace

TEST_CASE("config: solver pairs parses with four weaves") {
  auto cfg = load_tapestry_config(path_of("solver_pairs.conf"));
  CHECK(cfg.modules.size() == 2);
  CHECK(cfg.beads.size() == 6);
  CHECK(cfg.weaves.size() == 4);
  CHECK(cfg.strings.size() == 4);
}

TEST_CASE("config: every shipped config parses, builds and round-trips") {
  for (const char* name : kConfigs) {
    INFO(name);
    auto cfg = load_tapestry_config(path_of(name));
    std::string once = serialize_tapestry_config(cfg);
    std::string twice = serialize_tapestry_config(parse_tapestry_config(once));
    CHECK(once == twice);
  }
}

TEST_CASE("config: errors carry locations and names") {
  CHECK(code_of([] { parse_tapestry_config(""); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_tapestry_config("weaves-config v1\n"); }) == ErrorCode::ParseError);
  try {
    parse_tapestry_config("weaves-config v1\n[module]\nname = m\nglobal = x i64:0\nentry = run count\nbogus line\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 6);
    CHECK(e.column() >= 1);
  }
  const char* unresolved =
      "weaves-config v1\n[module]\nname = m\nentry = run noop\n[bead]\nlabel = A\nmodule = m\n"
      "[weave]\nlabel = W\nbeads = A B\n";
  CHECK(code_of([&] { parse_tapestry_config(unresolved); }) == ErrorCode::UnresolvedReference);
  CHECK(code_of([] { parse_tapestry_config("weaves-config v2\n[module]\nname = m\nentry = run noop\n"); }) ==
        ErrorCode::ParseError);
}

TEST_CASE("monitor: queries on the solver pairs run") {
  Runtime rt;
  build_tapestry(rt, load_tapestry_config(path_of("solver_pairs.conf")));
  std::string summary = monitor_query(rt, "summary");
  CHECK(summary.find("beads=6\n") != std::string::npos);
  CHECK(summary.find("weaves=4\n") != std::string::npos);
  CHECK(summary.find("strings=4\n") != std::string::npos);
  CHECK(monitor_query(rt, "classes") == "class id=0 strings=0,1\nclass id=1 strings=2,3\n");
  CHECK(monitor_query(rt, "islands").find("beads=S1,S2,M12") != std::string::npos);
  rt.run();
  std::istringstream lines(monitor_query(rt, "strings"));
  int n = 0;
  for (std::string line; std::getline(lines, line); ++n) CHECK(line.find("status=finished") != std::string::npos);
  CHECK(n == 4);
  for (const auto& q : monitor_queries()) CHECK_NOTHROW(monitor_query(rt, q));
  CHECK(code_of([&] { monitor_query(rt, "nonsense"); }) == ErrorCode::UnknownQuery);
}

TEST_CASE("monitor: queries never perturb execution") {
  auto run = [](bool query) {
    SchedulerConfig sc;
    sc.policy = SchedulingPolicy::SeededRandom;
    sc.seed = 9;
    sc.quantum = 2;
    RuntimeConfig rc;
    rc.scheduler = sc;
    Runtime rt(rc);
    build_tapestry(rt, load_tapestry_config(path_of("solver_pairs.conf")));
    while (rt.dispatch_once())
      if (query)
        for (const auto& q : monitor_queries()) (void)monitor_query(rt, q);
    return rt.trace();
  };
  CHECK(run(true) == run(false));
}

TEST_CASE("monitor: commands reconfigure at the next dispatch boundary") {
  Runtime rt;
  build_tapestry(rt, load_tapestry_config(path_of("deadlock.conf")));
  CHECK(monitor_respond(rt, "add_bead worker C") == "ok=queued\n\n");
  // C keeps the default lock names, so the new string runs over A's locks instead.
  CHECK(monitor_respond(rt, "add_weave WC A") == "ok=queued\n\n");
  CHECK(monitor_respond(rt, "spawn_string WC run") == "ok=queued\n\n");
  CHECK(rt.tapestry().strings().size() == 2);
  CHECK(rt.run().outcome == RunOutcome::Finished);
  CHECK(rt.command_errors().empty());
  CHECK(rt.tapestry().strings().size() == 3);
  CHECK(rt.tapestry().beads().size() == 3);
  for (const auto& s : rt.tapestry().strings()) CHECK(s.state.status == StringStatus::Finished);
  CHECK(monitor_respond(rt, "add_bead onlyone").rfind("error=", 0) == 0);
  CHECK_FALSE(parse_monitor_command("frobnicate x"));
}

TEST_CASE("reconfiguration commands are atomic") {
  Runtime rt;
  build_tapestry(rt, load_tapestry_config(path_of("deadlock.conf")));
  auto weaves = rt.tapestry().weaves().size();
  auto beads = rt.tapestry().beads().size();
  CHECK_THROWS(rt.apply(command::AddWeave{{"A", "missing"}, "bad"}));
  CHECK_THROWS(rt.apply(command::AddBead{"nomodule", "Z"}));
  CHECK_THROWS(rt.apply(command::SpawnString{"WA", "nope"}));
  CHECK(rt.tapestry().weaves().size() == weaves);
  CHECK(rt.tapestry().beads().size() == beads);
  CHECK(rt.tapestry().strings().size() == 2);
  rt.submit(command::AddWeave{{"missing"}, "bad"});
  rt.run();
  CHECK(rt.command_errors().size() == 1);
  CHECK(rt.tapestry().weaves().size() == weaves);
}

TEST_CASE("CLI: exit codes and reports") {
  auto ok = cli("run " + path_of("solver_pairs.conf"));
  CHECK(ok.code == 0);
  CHECK(ok.out.find("finished=4") != std::string::npos);
  auto dl = cli("run " + path_of("deadlock.conf"));
  CHECK(dl.code == 0);
  CHECK(dl.out.find("recoveries=1") != std::string::npos);
  auto empty = std::filesystem::temp_directory_path() / "weaves_empty.conf";
  std::ofstream(empty).close();
  CHECK(cli("run " + empty.string()).code == 2);
  CHECK(cli("monitor bogus --config " + path_of("solver_pairs.conf")).code == 3);
  CHECK(cli("monitor classes --config " + path_of("solver_pairs.conf")).code == 0);
  auto image = std::filesystem::temp_directory_path() / "weaves_test.wvck";
  CHECK(cli("checkpoint " + path_of("solver_pairs.conf") + " --out " + image.string() + " --steps 20").code == 0);
  auto restored = cli("restore " + image.string());
  CHECK(restored.code == 0);
  CHECK(restored.out.find("finished=4") != std::string::npos);
  CHECK(cli("grid run " + path_of("grid.conf")).code == 0);
  CHECK(cli("--definitely-not-a-flag").code == 2);
}
