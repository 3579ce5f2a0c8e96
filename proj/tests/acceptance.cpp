// Acceptance suite: one PASS/FAIL line per criterion, followed by the
// measurements behind it. Tolerances are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "weaves/address_space.hpp"
#include "weaves/apps/collective.hpp"
#include "weaves/apps/delay.hpp"
#include "weaves/apps/ode.hpp"
#include "weaves/apps/pde.hpp"
#include "weaves/apps/quadrature.hpp"
#include "weaves/config.hpp"
#include "weaves/error.hpp"
#include "weaves/mining.hpp"
#include "weaves/recommender.hpp"
#include "weaves/runtime.hpp"
#include "weaves/value.hpp"

using namespace weaves;

namespace {

constexpr double kSeparationSeconds = 60.0;
constexpr std::size_t kSeparationSeeds = 1000;
constexpr double kDelayTarget = 2.0;
constexpr double kDelayRatio = 1.10;
constexpr double kDelayVariation = 0.005;
constexpr double kDelaySeconds = 300.0;
constexpr double kActivationRatio = 2.0;
constexpr int kActivationTrials = 1000;
constexpr std::size_t kCheckpointOps = 10000;
constexpr double kCheckpointSeconds = 60.0;
constexpr std::size_t kLockWorkloads = 100;
constexpr std::size_t kGridScenarios = 50;
constexpr double kPdeTolerance = 1e-6;
constexpr double kOrderSlack = 0.20;
constexpr double kBellmanTolerance = 1e-6;
constexpr double kRegionCoverage = 0.90;
constexpr double kRegionFalse = 0.10;
constexpr double kOdeRatio = 50.0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok   " : "MISS ") + what);
  }
};

template <class T>
std::string fmt(T v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// ------------------------------------------------------------------ 1

Outcome separation() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  std::size_t failures = 0;
  std::string first;
  for (std::uint64_t seed = 1; seed <= kSeparationSeeds; ++seed) {
    if (auto f = oracle::check_separation(seed)) {
      if (!failures) first = *f;
      ++failures;
    }
  }
  double t = seconds_since(t0);
  o.check(failures == 0, "cases passing " + fmt(kSeparationSeeds - failures) + "/" + fmt(kSeparationSeeds) +
                             (first.empty() ? "" : " first failure: " + first));
  o.check(t < kSeparationSeconds, "runtime " + fmt(t) + " s < " + fmt(kSeparationSeconds) + " s");
  return o;
}

// ------------------------------------------------------------------ 2

Outcome delay_benchmark() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::uint32_t> ns;
  for (std::uint32_t n = 1; n <= 1024; n *= 2) ns.push_back(n);
  ns.push_back(1000);
  apps::DelayConfig cfg;
  cfg.target_seconds = kDelayTarget;
  cfg.runs = 5;
  auto report = apps::run_delay_benchmark(ns, cfg);
  double worst = 0.0;
  double variation_1000 = 0.0;
  for (const auto& p : report.points) {
    worst = std::max(worst, p.ratio);
    if (p.n == 1000) variation_1000 = p.variation;
    o.notes.push_back("     n=" + fmt(p.n) + " median=" + fmt(p.median) + " s ratio=" + fmt(p.ratio) +
                      " variation=" + fmt(p.variation) + " switch_overhead=" + fmt(p.switch_overhead) + " s");
  }
  o.check(report.baseline_median > 0.5 * kDelayTarget && report.baseline_median < 2.0 * kDelayTarget,
          "baseline median " + fmt(report.baseline_median) + " s near " + fmt(kDelayTarget) + " s");
  o.check(worst <= kDelayRatio, "worst ratio " + fmt(worst) + " <= " + fmt(kDelayRatio));
  o.check(variation_1000 <= kDelayVariation,
          "run-to-run variation at n=1000 " + fmt(variation_1000) + " <= " + fmt(kDelayVariation));
  double t = seconds_since(t0);
  o.check(t < kDelaySeconds, "runtime " + fmt(t) + " s < " + fmt(kDelaySeconds) + " s");
  return o;
}

// ------------------------------------------------------------------ 3

Outcome activation() {
  Outcome o;
  Runtime rt;
  auto make = [&](const std::string& name, int n) {
    ModuleDef d;
    d.name = name;
    for (int i = 0; i < n; ++i) d.globals.push_back({"s" + std::to_string(i), value::from_i64(i)});
    d.entries.push_back({"main", [](StringContext&) { return StepStatus::Finished; }});
    rt.register_module(d);
    return rt.define_weave({rt.instantiate_bead(name, name + "_b")}, name + "_w");
  };
  WeaveId small = make("small", 10);
  WeaveId large = make("large", 10000);
  auto& names = rt.names();
  const ContextTable* ts = &names.table(small);
  const ContextTable* tl = &names.table(large);
  auto trial = [&](const ContextTable* t) {
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 1000; ++i) {
      names.activate(t);
      std::atomic_signal_fence(std::memory_order_seq_cst);
    }
    return seconds_since(t0);
  };
  std::vector<double> a, b;
  for (int i = 0; i < kActivationTrials; ++i) {
    a.push_back(trial(ts));
    b.push_back(trial(tl));
  }
  names.activate(nullptr);
  double ma = apps::median(a), mb = apps::median(b);
  o.check(mb < kActivationRatio * ma, "median 10000 symbols " + fmt(mb * 1e6) + " us vs 10 symbols " + fmt(ma * 1e6) +
                                         " us per 1000 activations, ratio " + fmt(mb / ma) + " < " +
                                         fmt(kActivationRatio));
  return o;
}

// ------------------------------------------------------------------ 4

Outcome checkpoint_roundtrip() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  std::size_t ops = 0, rounds = 0, mismatches = 0, log_mismatches = 0;
  std::string first;
  for (std::uint64_t seed = 1; ops < kCheckpointOps; ++seed) {
    oracle::MemoryWorkload wl(seed);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 50; ++i, ++ops) wl.step();
    // One outer checkpoint held across several inner rounds.
    auto outer_copy = oracle::eager_copy(wl.rt);
    auto outer = wl.rt.take_checkpoint(CheckpointScope::whole_tapestry(), CheckpointMode::Cow);
    for (int r = 0; r < 4; ++r, ++rounds) {
      auto mode = rng() % 3 == 0 ? CheckpointMode::Naive : CheckpointMode::Cow;
      auto copy = oracle::eager_copy(wl.rt);
      auto cp = wl.rt.take_checkpoint(CheckpointScope::whole_tapestry(), mode);
      std::uint32_t watermark = wl.rt.checkpoints().get(cp).cell_watermark;
      std::set<CellId> mutated;
      std::size_t n = 100 + rng() % 400;
      for (std::size_t i = 0; i < n; ++i, ++ops)
        if (auto c = wl.step(); c && c->value < watermark) mutated.insert(*c);
      if (mode == CheckpointMode::Cow && wl.rt.checkpoints().get(cp).log_size() != mutated.size()) ++log_mismatches;
      for (int twice = 0; twice < 2; ++twice) {
        wl.rt.restore(cp);
        if (auto d = oracle::compare_with_copy(wl.rt, copy)) {
          if (!mismatches) first = *d;
          ++mismatches;
        }
      }
      wl.rt.checkpoints().discard(cp);
      wl.resync();
      for (int i = 0; i < 20; ++i, ++ops) wl.step();
    }
    wl.rt.restore(outer);
    if (auto d = oracle::compare_with_copy(wl.rt, outer_copy)) {
      if (!mismatches) first = *d;
      ++mismatches;
    }
  }
  double t = seconds_since(t0);
  o.check(ops >= kCheckpointOps, "operations " + fmt(ops) + " over " + fmt(rounds) + " checkpoint rounds");
  o.check(mismatches == 0, "restores differing from the eager copy: " + fmt(mismatches) + (first.empty() ? "" : " (" + first + ")"));
  o.check(log_mismatches == 0, "cow log size != distinct pre-existing cells mutated: " + fmt(log_mismatches));
  o.check(t < kCheckpointSeconds, "runtime " + fmt(t) + " s < " + fmt(kCheckpointSeconds) + " s");
  return o;
}

// ------------------------------------------------------------------ 5

Outcome deadlock_recovery() {
  Outcome o;
  {
    Runtime rt;
    auto built = build_tapestry(rt, load_tapestry_config(WEAVES_SOURCE_DIR "/configs/deadlock.conf"));
    rt.set_quantum(1);
    auto r = rt.run();
    bool ok = r.outcome == RunOutcome::Finished && rt.recoveries() == 1 &&
              rt.read_i64(built.weaves["WA"], "count") == 1 && rt.read_i64(built.weaves["WB"], "count") == 1;
    o.check(ok, "two-string two-lock cycle: recoveries=" + fmt(rt.recoveries()));
  }
  std::size_t finished = 0, matched = 0, recovered = 0;
  std::uint64_t total = 0;
  for (std::uint64_t seed = 1; seed <= kLockWorkloads; ++seed) {
    auto plan = oracle::random_transfer_plan(seed);
    auto run = oracle::run_transfers(plan, seed, 1 + static_cast<std::uint32_t>(seed % 4));
    finished += run.finished;
    matched += run.balances == oracle::serial_balances(plan);
    recovered += run.recoveries > 0;
    total += run.recoveries;
  }
  o.check(recovered == kLockWorkloads, "workloads with a detected and recovered cycle " + fmt(recovered) + "/" +
                                          fmt(kLockWorkloads) + " (recoveries " + fmt(total) + ")");
  o.check(finished == kLockWorkloads, "workloads completed " + fmt(finished) + "/" + fmt(kLockWorkloads));
  o.check(matched == kLockWorkloads, "final balances equal the serial oracle " + fmt(matched) + "/" + fmt(kLockWorkloads));
  return o;
}

// ------------------------------------------------------------------ 6

Outcome partial_checkpoint() {
  Outcome o;
  const double losses[] = {0.0, 0.1, 0.3};
  std::size_t same = 0, oracle_ok = 0, dropped_runs = 0;
  std::mt19937_64 rng(2024);
  for (std::size_t i = 0; i < kGridScenarios; ++i) {
    apps::CollectiveConfig cfg;
    cfg.ranks = 2 + static_cast<std::uint32_t>(rng() % 3);
    cfg.rounds = 3 + static_cast<std::uint32_t>(rng() % 6);
    cfg.steps_per_tick = 1 + static_cast<std::uint32_t>(rng() % 4);
    cfg.network.loss = losses[i % 3];
    cfg.network.max_delay = 1 + static_cast<std::uint32_t>(rng() % 3);
    cfg.network.seed = 100 + i;
    auto straight = apps::run_collective(cfg);
    std::uint64_t tick = 1 + rng() % std::max<std::uint64_t>(1, straight.ticks - 1);
    std::map<std::uint32_t, NodeId> remap;
    if (i % 5 == 4) remap[0] = NodeId(2 * cfg.ranks - 1);
    auto restored = apps::run_collective(cfg, tick, remap);
    same += restored.states == straight.states;
    oracle_ok += straight.states == apps::collective_oracle(cfg.ranks, cfg.rounds);
    dropped_runs += restored.dropped_at_checkpoint > 0;
  }
  o.check(same == kGridScenarios, "restored runs equal straight-through " + fmt(same) + "/" + fmt(kGridScenarios));
  o.check(oracle_ok == kGridScenarios, "straight-through runs equal the oracle " + fmt(oracle_ok) + "/" + fmt(kGridScenarios));
  o.check(dropped_runs > 0, "scenarios checkpointed with messages in flight (mid-collective): " + fmt(dropped_runs));
  return o;
}

// ------------------------------------------------------------------ 7

Outcome migration() {
  Outcome o;
  for (auto kind : {apps::SourceKind::Zero, apps::SourceKind::One, apps::SourceKind::Sine}) {
    auto [l, r] = apps::unit_problem(kind, 0.0, kind == apps::SourceKind::Zero ? 1.0 : 0.0, 33);
    apps::MediatorConfig mc;
    auto plain = apps::run_pde_on_grid(l, r, mc, std::nullopt);
    for (std::uint64_t at : {std::uint64_t{1}, plain.ticks / 3, 2 * plain.ticks / 3, plain.ticks - 1}) {
      auto moved = apps::run_pde_on_grid(l, r, mc, at);
      bool same = moved.final_rank == 1 && moved.result.interface == plain.result.interface &&
                  moved.result.iterations == plain.result.iterations && moved.result.left == plain.result.left &&
                  moved.result.right == plain.result.right && moved.result.history == plain.result.history;
      o.check(same, "source " + fmt(static_cast<int>(kind)) + " migrated at tick " + fmt(at) + "/" + fmt(plain.ticks) +
                        ": interface " + fmt(moved.result.interface) + " iterations " +
                        fmt(moved.result.iterations) + " vs " + fmt(plain.result.iterations));
    }
  }
  return o;
}

// ------------------------------------------------------------------ 8

Outcome address_split() {
  Outcome o;
  auto a = partition_address_space(64, 40);
  o.check(a.per_node_bytes == 1099511627776ULL && a.max_nodes == 16777216ULL,
          "(64,40) -> " + fmt(a.per_node_bytes) + " bytes, " + fmt(a.max_nodes) + " nodes");
  auto b = partition_address_space(36, 32);
  o.check(b.per_node_bytes == 4294967296ULL && b.max_nodes == 16ULL,
          "(36,32) -> " + fmt(b.per_node_bytes) + " bytes, " + fmt(b.max_nodes) + " nodes");
  return o;
}

// ------------------------------------------------------------------ 9

Outcome pde_accuracy() {
  Outcome o;
  {
    auto [l, r] = apps::unit_problem(apps::SourceKind::Zero, 0.0, 1.0, 33);
    auto res = apps::solve_mediated_pde(l, r, {});
    o.check(std::abs(res.interface - 0.5) < kPdeTolerance,
            "Laplace interface " + fmt(res.interface) + " (iterations " + fmt(res.iterations) + ")");
  }
  {
    auto [l, r] = apps::unit_problem(apps::SourceKind::One, 0.0, 0.0, 33);
    auto res = apps::solve_mediated_pde(l, r, {});
    o.check(std::abs(res.interface - 0.125) < kPdeTolerance,
            "-u''=1 interface " + fmt(res.interface) + " (iterations " + fmt(res.iterations) + ")");
  }
  std::vector<double> errs;
  for (std::uint32_t n : {17, 33, 65, 129}) {
    auto [l, r] = apps::unit_problem(apps::SourceKind::Sine, 0.0, 0.0, n);
    apps::MediatorConfig mc;
    mc.tolerance = 1e-14;
    mc.max_iterations = 5000;
    auto res = apps::solve_mediated_pde(l, r, mc);
    double e = 0.0;
    auto scan = [&](const std::vector<double>& u, const apps::PdeDomainSpec& d) {
      for (std::size_t i = 0; i < u.size(); ++i) {
        double x = d.lo + (d.hi - d.lo) * double(i) / double(u.size() - 1);
        e = std::max(e, std::abs(u[i] - apps::exact_solution(apps::SourceKind::Sine, 0.0, 0.0, x)));
      }
    };
    scan(res.left, l);
    scan(res.right, r);
    errs.push_back(e);
  }
  for (std::size_t i = 1; i < errs.size(); ++i) {
    double ratio = errs[i - 1] / errs[i];
    o.check(std::abs(ratio / 4.0 - 1.0) <= kOrderSlack,
            "error ratio on halving h " + fmt(ratio) + " (errors " + fmt(errs[i - 1]) + " -> " + fmt(errs[i]) + ")");
  }
  return o;
}

// ------------------------------------------------------------------ 10

Outcome recommender() {
  Outcome o;
  {
    oracle::ToyMdp m;
    auto fixed = oracle::toy_mdp_fixed_point(m);
    QConfig cfg;
    cfg.alpha = 0.5;
    cfg.gamma = m.gamma;
    QPolicy p(cfg);
    auto actions = oracle::toy_actions();
    for (int sweep = 0; sweep < 10000; ++sweep)
      for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a) {
          auto next = oracle::toy_state(m.next[s][a]);
          p.update(oracle::toy_state(s), actions[a], m.reward[s][a], &next, actions);
        }
    double worst = 0.0;
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 2; ++a) worst = std::max(worst, std::abs(p.q(oracle::toy_state(s), actions[a]) - fixed[s][a]));
    o.check(worst < kBellmanTolerance, "toy MDP max |Q - Q*| " + fmt(worst));
  }
  {
    auto family = apps::singular_family(10);
    QPolicy policy;
    apps::train_quadrature(policy, family, 100, 80);
    policy.set_epsilon(0.0);
    double learned = 0.0, worst_error = 0.0;
    bool accurate = true;
    for (const auto& p : family) {
      auto r = apps::integrate_adaptive_quadrature(p, policy);
      learned += double(r.evaluations);
      worst_error = std::max(worst_error, std::abs(r.value - *p.exact));
      accurate &= std::abs(r.value - *p.exact) <= p.tolerance;
    }
    learned /= double(family.size());
    apps::QuadratureOptions fixed;
    fixed.budget = 10000;
    double best = 1e300;
    std::string best_name;
    for (auto rule : apps::kStandardRules) {
      auto s = apps::summarize_fixed_rule(family, rule, fixed);
      o.notes.push_back("     fixed " + std::string(apps::rule_name(rule)) + " mean evaluations " +
                        (s.exceeded ? ">= " : "") + fmt(s.mean_evaluations) + " failed " + fmt(s.failed) +
                        " over budget " + fmt(s.exceeded));
      // A rule that cannot finish the whole family is not a competitor at this accuracy target.
      if (s.failed == 0 && s.mean_evaluations < best) {
        best = s.mean_evaluations;
        best_name = std::string(apps::rule_name(rule));
      }
    }
    o.check(accurate, "learned policy within tolerance on all 10 problems (max error " + fmt(worst_error) + ")");
    o.check(learned <= best, "learned mean evaluations " + fmt(learned) + " <= best fixed (" + best_name + ") " + fmt(best));
  }
  {
    auto truth = oracle::banded_region_truth();
    auto db = oracle::banded_region_database(truth, 6);
    auto region = mine_regions(db, "A", "B", 0.9);
    auto s = oracle::score_region(region, truth);
    o.check(s.coverage >= kRegionCoverage && s.false_inclusion <= kRegionFalse,
            "banded region coverage " + fmt(s.coverage) + " false inclusion " + fmt(s.false_inclusion) + " in " +
                fmt(region.boxes.size()) + " boxes");
  }
  return o;
}

// ------------------------------------------------------------------ 11

Outcome optimistic_adaptivity() {
  Outcome o;
  auto family = apps::singular_family(10);
  apps::QuadratureOptions opts;
  opts.rules = {apps::QuadRule::FragileGauss5, apps::QuadRule::Midpoint, apps::QuadRule::Trapezoid,
                apps::QuadRule::Simpson, apps::QuadRule::Gauss5};
  std::size_t episodes = 0, repeats = 0, inaccurate = 0, rollbacks = 0, failures = 0;
  auto audit = [&](const apps::QuadratureProblem& p, const apps::QuadratureResult& r) {
    ++episodes;
    rollbacks += r.rollbacks;
    std::map<std::int64_t, std::set<std::string>> failed;
    for (const auto& d : r.trace) {
      if (failed[d.node].count(d.action)) ++repeats;
      if (d.failed) {
        failed[d.node].insert(d.action);
        ++failures;
      }
    }
    if (std::abs(r.value - *p.exact) > p.tolerance) ++inaccurate;
  };
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    QConfig cfg;
    cfg.seed = seed;
    QPolicy biased(cfg);
    biased.set_epsilon(0.0);
    for (const char* edge : {"singular", "near", "far"})
      biased.set_q(FeatureState{{"stage", "interval"}, {"edge", edge}},
                   {ActionKind::ChooseModule, std::string(apps::rule_name(apps::QuadRule::FragileGauss5))}, 10.0);
    for (const auto& p : family) audit(p, apps::integrate_adaptive_quadrature(p, biased, opts));
    QPolicy exploring(cfg);
    exploring.set_epsilon(1.0);
    for (const auto& p : family) {
      try {
        audit(p, apps::integrate_adaptive_quadrature(p, exploring, opts));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::BudgetExceeded) throw;
      }
    }
  }
  o.check(failures > 0 && rollbacks > 0, "episodes " + fmt(episodes) + " with " + fmt(failures) +
                                             " injected failures and " + fmt(rollbacks) + " rollbacks");
  o.check(repeats == 0, "failed (state, action) reappearing on its subinterval: " + fmt(repeats));
  o.check(inaccurate == 0, "episodes outside tolerance: " + fmt(inaccurate));
  return o;
}

// ------------------------------------------------------------------ 12

Outcome ode_switching() {
  Outcome o;
  QPolicy policy;
  apps::train_ode_switching(policy, apps::ode_training_family(), 150, 120);
  policy.set_epsilon(0.0);
  auto p = apps::stiff_cosine_problem();
  apps::OdeOptions opt;
  auto ex = apps::integrate_ode_fixed(p, apps::OdeMethod::Explicit, opt);
  auto sw = apps::integrate_ode_switching(p, policy, opt);
  double e_ex = std::abs(ex.y - p.exact(p.t1)), e_sw = std::abs(sw.y - p.exact(p.t1));
  double ratio = double(ex.steps) / double(sw.steps);
  o.check(ratio >= kOdeRatio, "explicit steps " + fmt(ex.steps) + " / switched steps " + fmt(sw.steps) + " = " +
                                  fmt(ratio) + " >= " + fmt(kOdeRatio));
  o.check(e_ex <= opt.tolerance && e_sw <= opt.tolerance,
          "final errors explicit " + fmt(e_ex) + " switched " + fmt(e_sw) + " within " + fmt(opt.tolerance));
  bool clause = false;
  auto rules = policy.extract_rules();
  for (const auto& r : rules) {
    const std::string* st = r.state.get("state");
    const std::string* alg = r.state.get("algorithm");
    clause |= st && *st == "near-stiff" && alg && *alg == "non-stiff" && r.action.name == "switch-to-stiff";
  }
  o.check(clause, "rules contain state(near-stiff), algorithm(non-stiff) -> switch-to-stiff (" + fmt(rules.size()) +
                      " rules)");
  std::istringstream text(format_rules(rules));
  for (std::string line; std::getline(text, line);) o.notes.push_back("     " + line);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"state separation and recombination", separation},
      {"scheduling delay benchmark", delay_benchmark},
      {"constant-time namespace activation", activation},
      {"checkpoint round trip", checkpoint_roundtrip},
      {"deadlock recovery", deadlock_recovery},
      {"partial-consistency grid checkpoint", partial_checkpoint},
      {"migration transparency", migration},
      {"address partition arithmetic", address_split},
      {"PDE accuracy", pde_accuracy},
      {"recommender", recommender},
      {"optimistic adaptivity", optimistic_adaptivity},
      {"ODE switching", ode_switching},
  };
  std::size_t passed = 0, evaluated = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    ++evaluated;
    passed += o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].name << " ("
              << std::fixed << std::setprecision(2) << seconds_since(t0) << " s)" << std::defaultfloat << '\n';
    for (const auto& n : o.notes) std::cout << "     " << n << '\n';
    std::cout << std::flush;
  }
  std::cout << "criteria=" << criteria.size() << " evaluated=" << evaluated << " passed=" << passed << '\n';
  return 0;
}
