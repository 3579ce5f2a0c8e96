#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "weaves/apps/delay.hpp"
#include "weaves/apps/ode.hpp"
#include "weaves/apps/pde.hpp"
#include "weaves/apps/quadrature.hpp"
#include "weaves/config.hpp"
#include "weaves/error.hpp"
#include "weaves/grid.hpp"
#include "weaves/image.hpp"
#include "weaves/monitor.hpp"
#include "weaves/recommender.hpp"
#include "weaves/runtime.hpp"

namespace {

using namespace weaves;

enum Exit { kOk = 0, kParse = 2, kRuntime = 3, kDeadlock = 4 };

struct Globals {
  std::uint64_t seed = 1;
  std::uint32_t quantum = 64;
  std::string policy_file;
  std::string trace_path;
};

SchedulerConfig scheduler_of(const Globals& g) {
  SchedulerConfig s;
  s.seed = g.seed;
  s.quantum = g.quantum;
  s.record_trace = !g.trace_path.empty();
  return s;
}

void kv(const std::string& key, const auto& value) { std::cout << key << '=' << value << '\n'; }

void write_trace_file(const Globals& g, const Runtime& rt) {
  if (g.trace_path.empty()) return;
  std::ofstream out(g.trace_path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + g.trace_path);
  write_trace(out, rt.trace());
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view outcome_name(RunOutcome o) {
  switch (o) {
    case RunOutcome::Finished: return "finished";
    case RunOutcome::Idle: return "idle";
    case RunOutcome::StepLimit: return "step-limit";
  }
  return "?";
}

void report_run(const Runtime& rt, const RunResult& r) {
  kv("outcome", outcome_name(r.outcome));
  kv("steps", rt.total_steps());
  kv("dispatches", rt.dispatches());
  kv("recoveries", rt.recoveries());
  std::size_t finished = 0;
  for (const auto& s : rt.tapestry().strings()) finished += s.state.status == StringStatus::Finished;
  kv("strings", rt.tapestry().strings().size());
  kv("finished", finished);
  for (const std::string& line : rt.command_errors()) kv("command_error", line);
  std::cout << monitor_query(rt, "strings");
}

/// Runtime built from a config file on rank 0.
struct Loaded {
  std::string text;
  TapestryConfig config;
  std::unique_ptr<Runtime> rt;
};

Loaded load(const std::string& path, const Globals& g) {
  Loaded l;
  l.text = read_text(path);
  l.config = parse_tapestry_config(l.text);
  RuntimeConfig rc;
  rc.scheduler = scheduler_of(g);
  l.rt = std::make_unique<Runtime>(rc);
  build_tapestry(*l.rt, l.config, 0);
  return l;
}

int cmd_run(const Globals& g, const std::string& path, std::uint64_t max_steps, bool serve) {
  Loaded l = load(path, g);
  if (serve) {
    serve_monitor(*l.rt, std::cin, std::cout);
    return kOk;
  }
  RunResult r = l.rt->run(max_steps);
  report_run(*l.rt, r);
  write_trace_file(g, *l.rt);
  return r.outcome == RunOutcome::Idle ? kRuntime : kOk;
}

int cmd_checkpoint(const Globals& g, const std::string& path, const std::string& out, std::uint64_t steps) {
  Loaded l = load(path, g);
  RunResult r = l.rt->run(steps);
  Bytes image = save_image(*l.rt, l.text);
  write_file(out, image);
  kv("outcome", outcome_name(r.outcome));
  kv("steps", l.rt->total_steps());
  kv("image", out);
  kv("image_bytes", image.size());
  write_trace_file(g, *l.rt);
  return kOk;
}

int cmd_restore(const Globals& g, const std::string& file, std::uint64_t max_steps) {
  Bytes image = read_file(file);
  std::string text = image_config(image);
  if (text.empty()) throw Error(ErrorCode::CorruptImage, "image carries no tapestry config");
  TapestryConfig config = parse_tapestry_config(text);
  RuntimeConfig rc;
  rc.scheduler = scheduler_of(g);
  Runtime rt(rc);
  build_tapestry(rt, config, 0);
  load_image(rt, image);
  RunResult r = rt.run(max_steps);
  report_run(rt, r);
  write_trace_file(g, rt);
  return r.outcome == RunOutcome::Idle ? kRuntime : kOk;
}

int cmd_grid_run(const Globals& g, const std::string& path, std::uint64_t max_ticks) {
  TapestryConfig config = load_tapestry_config(path);
  auto grid = build_grid(config, scheduler_of(g));
  const bool done = grid->run(max_ticks);
  kv("finished", done ? "true" : "false");
  kv("ticks", grid->now());
  kv("ranks", grid->ranks());
  for (std::uint32_t r = 0; r < grid->ranks(); ++r) {
    const Runtime& rt = grid->rank(r);
    std::size_t finished = 0, live = 0;
    for (const StringRecord& s : rt.tapestry().strings()) {
      if (s.state.status == StringStatus::Finished) ++finished;
      if (s.live()) ++live;
    }
    std::cout << "rank id=" << r << " node=" << grid->node_of(r).value << " alive=" << (grid->alive(r) ? 1 : 0)
              << " strings=" << rt.tapestry().strings().size() << " finished=" << finished << " live=" << live
              << " steps=" << rt.total_steps() << '\n';
  }
  for (const std::string& line : grid->log()) std::cout << "log " << line << '\n';
  return done ? kOk : kRuntime;
}

int cmd_monitor(const Globals& g, const std::string& path, const std::string& query, std::uint64_t steps) {
  Loaded l = load(path, g);
  if (steps > 0) l.rt->run(steps);
  std::cout << monitor_query(*l.rt, query);
  return kOk;
}

int cmd_bench_delay(std::uint32_t n, std::uint32_t runs, double target, std::uint64_t chunk, const Globals& g) {
  apps::DelayConfig c;
  c.runs = runs;
  c.target_seconds = target;
  c.chunk = chunk;
  c.scheduler.seed = g.seed;
  c.scheduler.quantum = g.quantum;
  apps::DelayReport rep = apps::run_delay_benchmark({n}, c);
  kv("iterations", rep.iterations);
  kv("baseline_median_s", rep.baseline_median);
  const apps::DelayPoint& p = rep.points.front();
  kv("n", p.n);
  kv("median_s", p.median);
  kv("ratio", p.ratio);
  kv("variation", p.variation);
  kv("dispatches", p.dispatches);
  kv("switch_overhead_s", p.switch_overhead);
  return kOk;
}

int demo_pde() {
  struct Case {
    const char* name;
    apps::SourceKind source;
    double ub;
  };
  for (const Case& c : {Case{"laplace", apps::SourceKind::Zero, 1.0}, Case{"unit-source", apps::SourceKind::One, 0.0}}) {
    auto [left, right] = apps::unit_problem(c.source, 0.0, c.ub, 33);
    apps::PdeResult r = apps::solve_mediated_pde(left, right, {});
    const double exact = apps::exact_solution(c.source, 0.0, c.ub, 0.5);
    std::cout << "case=" << c.name << " interface=" << r.interface << " exact=" << exact
              << " error=" << std::fabs(r.interface - exact) << " iterations=" << r.iterations << '\n';
  }
  return kOk;
}

/// Loads the policy file when it exists, otherwise trains and saves to it.
template <typename Train>
QPolicy policy_for(const Globals& g, Train train) {
  if (!g.policy_file.empty() && std::filesystem::exists(g.policy_file)) {
    kv("policy", "loaded");
    return QPolicy::load(g.policy_file);
  }
  QConfig qc;
  qc.seed = g.seed;
  QPolicy policy(qc);
  train(policy);
  if (!g.policy_file.empty()) policy.save(g.policy_file);
  kv("policy", "trained");
  return policy;
}

int demo_quad(const Globals& g) {
  const auto family = apps::singular_family();
  QPolicy policy = policy_for(g, [&](QPolicy& p) { apps::train_quadrature(p, family, 100, 80); });
  policy.set_mode(PolicyMode::Exploit);
  policy.set_epsilon(0.0);
  double learned = 0.0;
  double worst_error = 0.0;
  for (const auto& p : family) {
    apps::QuadratureResult r = apps::integrate_adaptive_quadrature(p, policy);
    learned += static_cast<double>(r.evaluations);
    worst_error = std::max(worst_error, std::fabs(r.value - *p.exact));
  }
  kv("problems", family.size());
  kv("learned_mean_evaluations", learned / static_cast<double>(family.size()));
  kv("learned_max_error", worst_error);
  apps::QuadratureOptions fixed;
  fixed.budget = 10'000;
  for (apps::QuadRule rule : apps::kStandardRules) {
    apps::FixedRuleSummary s = apps::summarize_fixed_rule(family, rule, fixed);
    std::cout << "rule=" << apps::rule_name(rule) << " mean_evaluations" << (s.exceeded ? ">=" : "=")
              << s.mean_evaluations << " over_budget=" << s.exceeded << " failed=" << s.failed << '\n';
  }
  std::cout << format_rules(policy.extract_rules());
  return kOk;
}

int demo_ode(const Globals& g) {
  QPolicy policy = policy_for(g, [](QPolicy& p) { apps::train_ode_switching(p, apps::ode_training_family(), 150, 120); });
  policy.set_mode(PolicyMode::Exploit);
  policy.set_epsilon(0.0);
  const apps::OdeProblem p = apps::stiff_cosine_problem();
  apps::OdeResult ex = apps::integrate_ode_fixed(p, apps::OdeMethod::Explicit);
  apps::OdeResult sw = apps::integrate_ode_switching(p, policy);
  kv("explicit_steps", ex.steps);
  kv("explicit_error", std::fabs(ex.y - p.exact(p.t1)));
  kv("switched_steps", sw.steps);
  kv("switched_error", std::fabs(sw.y - p.exact(p.t1)));
  kv("step_ratio", static_cast<double>(ex.steps) / static_cast<double>(sw.steps));
  for (const apps::OdeSwitch& s : sw.switches)
    std::cout << "switch t=" << s.t << " from=" << apps::method_name(s.from) << " to=" << apps::method_name(s.to)
              << '\n';
  std::cout << format_rules(policy.extract_rules());
  return kOk;
}

int exit_code_of(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ParseError:
    case ErrorCode::UnresolvedReference:
    case ErrorCode::CorruptImage: return kParse;
    case ErrorCode::AllBlocked: return kDeadlock;
    default: return kRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weaves runtime: run tapestries, demos, benchmarks, checkpoints and the monitor"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Scheduler and policy seed");
  app.add_option("--quantum", g.quantum, "Steps per dispatch")->check(CLI::PositiveNumber);
  app.add_option("--policy-file", g.policy_file, "Policy to load, or to save after training");
  app.add_option("--trace", g.trace_path, "Write the scheduler trace here");

  std::string config_path, out_path, query, image_path, demo_name;
  std::uint64_t max_steps = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t steps = 0;
  std::uint64_t max_ticks = 1'000'000;
  bool serve = false;
  std::uint32_t bench_n = 1000, bench_runs = 5;
  double bench_target = 2.0;
  std::uint64_t bench_chunk = apps::DelayConfig{}.chunk;

  auto* run = app.add_subcommand("run", "Load a tapestry config and run it to completion");
  run->add_option("config", config_path)->required();
  run->add_option("--max-steps", max_steps);
  run->add_flag("--serve", serve, "Answer monitor requests on stdin instead of running");

  auto* bench = app.add_subcommand("bench", "Benchmarks");
  bench->require_subcommand(1);
  auto* delay = bench->add_subcommand("delay", "Delay-loop scheduling benchmark");
  delay->add_option("--n", bench_n, "Number of weaves")->check(CLI::PositiveNumber);
  delay->add_option("--runs", bench_runs)->check(CLI::PositiveNumber);
  delay->add_option("--target", bench_target, "Baseline seconds")->check(CLI::PositiveNumber);
  delay->add_option("--chunk", bench_chunk, "Loop iterations per step")->check(CLI::PositiveNumber);

  auto* demo = app.add_subcommand("demo", "Application demos");
  demo->add_option("name", demo_name)->required()->check(CLI::IsMember({"pde", "quad", "ode"}));

  auto* checkpoint = app.add_subcommand("checkpoint", "Run a config for some steps and save a state image");
  checkpoint->add_option("config", config_path)->required();
  checkpoint->add_option("--out", out_path)->required();
  checkpoint->add_option("--steps", steps, "Steps to run before saving");

  auto* restore = app.add_subcommand("restore", "Restore a state image and run to completion");
  restore->add_option("image", image_path)->required();
  restore->add_option("--max-steps", max_steps);

  auto* grid = app.add_subcommand("grid", "Simulated grid");
  grid->require_subcommand(1);
  auto* grid_run = grid->add_subcommand("run", "Run a config with a [grid] section and its events");
  grid_run->add_option("config", config_path)->required();
  grid_run->add_option("--max-ticks", max_ticks);

  auto* monitor = app.add_subcommand("monitor", "Query a tapestry loaded from a config");
  monitor->add_option("query", query)->required();
  monitor->add_option("--config", config_path)->required();
  monitor->add_option("--steps", steps, "Steps to run before the query");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kParse;
  }

  try {
    if (*run) return cmd_run(g, config_path, max_steps, serve);
    if (*delay) return cmd_bench_delay(bench_n, bench_runs, bench_target, bench_chunk, g);
    if (*demo) {
      if (demo_name == "pde") return demo_pde();
      if (demo_name == "quad") return demo_quad(g);
      return demo_ode(g);
    }
    if (*checkpoint) return cmd_checkpoint(g, config_path, out_path, steps);
    if (*restore) return cmd_restore(g, image_path, max_steps);
    if (*grid_run) return cmd_grid_run(g, config_path, max_ticks);
    if (*monitor) return cmd_monitor(g, config_path, query, steps);
  } catch (const Error& e) {
    std::cerr << "error=" << e.what() << '\n';
    return exit_code_of(e);
  } catch (const std::exception& e) {
    std::cerr << "error=" << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
