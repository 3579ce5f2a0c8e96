#include "weaves/apps/quadrature.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "weaves/error.hpp"
#include "weaves/runtime.hpp"
#include "weaves/value.hpp"

namespace weaves::apps {

std::string_view rule_name(QuadRule r) {
  switch (r) {
    case QuadRule::Midpoint: return "midpoint";
    case QuadRule::Trapezoid: return "trapezoid";
    case QuadRule::Simpson: return "simpson";
    case QuadRule::Gauss5: return "gauss5";
    case QuadRule::FragileGauss5: return "gauss5-fragile";
  }
  return "?";
}

std::uint32_t rule_points(QuadRule r) {
  switch (r) {
    case QuadRule::Midpoint: return 1;
    case QuadRule::Trapezoid: return 2;
    case QuadRule::Simpson: return 3;
    case QuadRule::Gauss5:
    case QuadRule::FragileGauss5: return 5;
  }
  return 0;
}

QuadratureProblem singular_problem(std::uint32_t i, double tolerance) {
  const double beta = 0.1 + 0.05 * i;
  const double k = 1.0 + i;
  QuadratureProblem p;
  std::ostringstream name;
  name << "x^-" << beta << "+cos(" << k << "x)";
  p.name = name.str();
  p.f = [beta, k](double x) { return std::pow(x, -beta) + std::cos(k * x); };
  p.a = 0.0;
  p.b = 1.0;
  p.tolerance = tolerance;
  p.singular_at = 0.0;
  p.exact = 1.0 / (1.0 - beta) + std::sin(k) / k;
  return p;
}

std::vector<QuadratureProblem> singular_family(std::uint32_t count, double tolerance) {
  std::vector<QuadratureProblem> out;
  for (std::uint32_t i = 0; i < count; ++i) out.push_back(singular_problem(i, tolerance));
  return out;
}

FeatureState interval_state(const QuadratureProblem& p, double a, double b) {
  std::string edge = "far";
  if (p.singular_at) {
    double s = *p.singular_at;
    double d = std::min(std::fabs(a - s), std::fabs(b - s));
    if (s >= a && s <= b)
      edge = "singular";
    else if (d < 4.0 * (b - a))
      edge = "near";
  }
  return FeatureState{{"stage", "interval"}, {"edge", edge}};
}

namespace {

constexpr double kGaussX[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                               0.9061798459386640};
constexpr double kGaussW[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};

/// Counts every integrand call; lives outside the checkpointed state, so a
/// rollback never hides work that was done.
struct Evaluator {
  const QuadratureProblem* problem;
  std::vector<QuadRule> rules;
  std::uint64_t count = 0;

  double f(double x) {
    ++count;
    return problem->f(x);
  }

  double apply(QuadRule r, double a, double b) {
    const double h = b - a;
    switch (r) {
      case QuadRule::Midpoint: return h * f(0.5 * (a + b));
      case QuadRule::Trapezoid: return h * 0.5 * (f(a) + f(b));
      case QuadRule::Simpson: return h * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b)) / 6.0;
      case QuadRule::Gauss5:
      case QuadRule::FragileGauss5: {
        const double c = 0.5 * (a + b);
        const double r2 = 0.5 * h;
        double s = 0.0;
        for (int i = 0; i < 5; ++i) s += kGaussW[i] * f(c + r2 * kGaussX[i]);
        if (r == QuadRule::FragileGauss5 && problem->singular_at && *problem->singular_at >= a &&
            *problem->singular_at <= b)
          return std::nan("");
        return r2 * s;
      }
    }
    return std::nan("");
  }
};

constexpr std::size_t kActive = 5;   // a, b, estimate, error, node
constexpr std::size_t kPending = 3;  // a, b, parent node
constexpr std::size_t kHistory = 4;  // node, a, b, rule

StepStatus quadrature_step(StringContext& ctx, Evaluator& ev) {
  Frame& f = ctx.frame();
  if (f.pc == 0) {
    std::vector<double> pending = {ctx.read_f64("lo"), ctx.read_f64("hi"), -1.0};
    ctx.write_f64s("pending", pending);
    f.pc = 1;
    return StepStatus::Yield;
  }
  auto pending = ctx.read_f64s("pending");
  if (!pending.empty()) {
    const std::int64_t choice = f.get_i64("choice", -1);
    if (choice < 0) return StepStatus::Yield;  // waiting for the recommender
    f.locals.erase("choice");
    const QuadRule rule = ev.rules.at(static_cast<std::size_t>(choice));
    const double a = pending[0];
    const double b = pending[1];
    const double m = 0.5 * (a + b);
    const double q1 = ev.apply(rule, a, b);
    const double q2 = ev.apply(rule, a, m) + ev.apply(rule, m, b);
    const double err = std::fabs(q2 - q1);
    const std::int64_t node = ctx.read_i64("next_node");
    auto history = ctx.read_f64s("history");
    history.insert(history.end(), {static_cast<double>(node), a, b, static_cast<double>(choice)});
    ctx.write_f64s("history", history);
    ctx.write_f64s("last", std::vector<double>{q1, q2, err});
    if (!std::isfinite(q2) || !std::isfinite(err)) {
      ctx.write_i64("failed", 1);
      return StepStatus::Yield;
    }
    auto active = ctx.read_f64s("active");
    active.insert(active.end(), {a, b, q2, err, static_cast<double>(node)});
    ctx.write_f64s("active", active);
    ctx.write_i64("next_node", node + 1);
    pending.erase(pending.begin(), pending.begin() + kPending);
    ctx.write_f64s("pending", pending);
    return StepStatus::Yield;
  }
  auto active = ctx.read_f64s("active");
  double total = 0.0;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < active.size(); i += kActive) {
    total += active[i + 3];
    if (active[i + 3] > active[worst + 3]) worst = i;
  }
  if (total <= ctx.read_f64("tol") * ctx.read_f64("safety")) {
    double sum = 0.0;
    for (std::size_t i = 0; i < active.size(); i += kActive) sum += active[i + 2];
    ctx.write_f64("result", sum);
    return StepStatus::Finished;
  }
  const double a = active[worst];
  const double b = active[worst + 1];
  const double node = active[worst + 4];
  const double m = 0.5 * (a + b);
  active.erase(active.begin() + static_cast<std::ptrdiff_t>(worst),
               active.begin() + static_cast<std::ptrdiff_t>(worst + kActive));
  ctx.write_f64s("active", active);
  ctx.write_f64s("pending", std::vector<double>{a, m, node, m, b, node});
  return StepStatus::Yield;
}

std::vector<std::string> describe_history(const std::vector<double>& h, const std::vector<QuadRule>& rules) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i + kHistory <= h.size(); i += kHistory) {
    std::ostringstream os;
    os << rule_name(rules.at(static_cast<std::size_t>(h[i + 3]))) << '[' << h[i + 1] << ',' << h[i + 2] << ']';
    out.push_back(os.str());
  }
  return out;
}

}  // namespace

QuadratureResult integrate_adaptive_quadrature(const QuadratureProblem& p, QPolicy& policy,
                                               const QuadratureOptions& options) {
  if (options.rules.empty()) throw Error(ErrorCode::InvalidArgument, "empty rule library");
  if (!(p.a < p.b) || !(p.tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "bad quadrature problem");
  Evaluator ev{&p, options.rules};
  std::vector<Action> legal;
  for (QuadRule r : options.rules) legal.push_back(Action{ActionKind::ChooseModule, std::string(rule_name(r))});

  RuntimeConfig rc;
  rc.scheduler.record_trace = false;
  Runtime rt(rc);
  ModuleDef m;
  m.name = "quadrature";
  m.globals = {{"lo", value::from_f64(p.a)},        {"hi", value::from_f64(p.b)},
               {"tol", value::from_f64(p.tolerance)}, {"safety", value::from_f64(options.safety)},
               {"active", value::from_f64s({})},    {"pending", value::from_f64s({})},
               {"failed", value::from_i64(0)},      {"last", value::from_f64s({})},
               {"history", value::from_f64s({})},   {"next_node", value::from_i64(0)},
               {"result", value::from_f64(0.0)}};
  m.entries = {{"integrate", [&ev](StringContext& ctx) { return quadrature_step(ctx, ev); }}};
  rt.register_module(std::move(m));
  WeaveId w = rt.define_weave({rt.instantiate_bead("quadrature", "quad")}, "quad");
  StringId s = rt.spawn_string(w, "integrate");

  QuadratureResult res;
  std::map<std::int64_t, std::int64_t> parent_of;  // node -> parent node
  std::map<std::int64_t, std::size_t> decision_of;  // node -> successful trace entry

  while (rt.tapestry().string(s).live()) {
    if (ev.count > options.budget)
      throw Error(ErrorCode::BudgetExceeded, p.name + ": more than " + std::to_string(options.budget) + " evaluations");
    rt.dispatch_once();
    if (!rt.tapestry().string(s).live()) break;
    auto pending = rt.read_f64s(w, "pending");
    if (pending.empty()) continue;
    const double a = pending[0];
    const double b = pending[1];
    const auto parent = static_cast<std::int64_t>(pending[2]);

    // Optimistic choice: checkpoint, try, and roll back on failure.
    CheckpointId cp = rt.take_checkpoint(CheckpointScope::of(s), CheckpointMode::Cow);
    FeatureState state = interval_state(p, a, b);
    for (;;) {
      Action act = policy.select(state, legal);
      std::size_t idx = 0;
      while (legal[idx].name != act.name) ++idx;
      rt.tapestry().string_mut(s).state.frame.set_i64("choice", static_cast<std::int64_t>(idx));
      const std::uint64_t before = ev.count;
      rt.dispatch_once();
      QuadDecision d;
      d.a = a;
      d.b = b;
      d.state = state;
      d.action = act.name;
      d.evaluations = ev.count - before;
      d.node = rt.read_i64(w, "next_node");
      if (rt.read_i64(w, "failed") != 0) {
        d.failed = true;
        d.history = describe_history(rt.read_f64s(w, "history"), options.rules);
        auto last = rt.read_f64s(w, "last");
        TupleView view{state, act, d.history, {{"estimate", last.size() > 1 ? last[1] : std::nan("")}}};
        rt.restore(cp);
        res.trace.push_back(std::move(d));
        ++res.rollbacks;
        state = policy.prune_failed_path(view);
        continue;
      }
      d.node -= 1;  // the successful attempt consumed the node id
      parent_of[d.node] = parent;
      decision_of[d.node] = res.trace.size();
      res.trace.push_back(std::move(d));
      break;
    }
    rt.checkpoints().discard(cp);
  }
  const auto& done = rt.tapestry().string(s);
  if (done.state.status != StringStatus::Finished) throw Error(ErrorCode::InvalidArgument, "quadrature string failed");
  res.value = rt.read_f64(w, "result");
  res.evaluations = ev.count;

  if (options.learn) {
    // Each decision is charged the evaluations of its whole subtree.
    std::vector<double> cost(res.trace.size(), 0.0);
    for (std::size_t i = 0; i < res.trace.size(); ++i) cost[i] = static_cast<double>(res.trace[i].evaluations);
    for (std::size_t i = res.trace.size(); i-- > 0;) {
      const auto& d = res.trace[i];
      if (d.failed) continue;
      auto pit = parent_of.find(d.node);
      if (pit == parent_of.end() || pit->second < 0) continue;
      cost[decision_of.at(pit->second)] += cost[i];
    }
    for (std::size_t i = 0; i < res.trace.size(); ++i) {
      const auto& d = res.trace[i];
      double reward = -cost[i] / options.cost_scale - (d.failed ? 1.0 : 0.0);
      policy.update(d.state, Action{ActionKind::ChooseModule, d.action}, reward, nullptr, {});
    }
  }
  return res;
}

QuadratureResult integrate_fixed_rule(const QuadratureProblem& p, QuadRule rule, QuadratureOptions options) {
  options.rules = {rule};
  options.learn = false;
  QPolicy policy;
  policy.set_epsilon(0.0);
  return integrate_adaptive_quadrature(p, policy, options);
}

TrainingCurve train_quadrature(QPolicy& policy, const std::vector<QuadratureProblem>& problems,
                               std::size_t episodes, std::size_t explore_episodes,
                               const QuadratureOptions& options) {
  if (problems.empty()) throw Error(ErrorCode::InvalidArgument, "no training problems");
  QuadratureOptions o = options;
  o.learn = true;
  TrainingCurve curve;
  curve.flip = explore_episodes;
  policy.set_mode(PolicyMode::Explore);
  for (std::size_t e = 0; e < episodes; ++e) {
    if (e == explore_episodes) policy.set_mode(PolicyMode::Exploit);
    policy.begin_episode();
    auto r = integrate_adaptive_quadrature(problems[e % problems.size()], policy, o);
    curve.evaluations.push_back(r.evaluations);
  }
  return curve;
}

FixedRuleSummary summarize_fixed_rule(const std::vector<QuadratureProblem>& problems, QuadRule rule,
                                      const QuadratureOptions& options) {
  if (problems.empty()) throw Error(ErrorCode::InvalidArgument, "no problems");
  FixedRuleSummary out;
  out.rule = rule;
  double total = 0.0;
  for (const QuadratureProblem& p : problems) {
    try {
      total += static_cast<double>(integrate_fixed_rule(p, rule, options).evaluations);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::BudgetExceeded) {
        ++out.exceeded;
        total += static_cast<double>(options.budget);
      } else if (e.code() == ErrorCode::NoLegalAction) {
        ++out.failed;
      } else {
        throw;
      }
    }
  }
  out.mean_evaluations = total / static_cast<double>(problems.size());
  return out;
}

}  // namespace weaves::apps
