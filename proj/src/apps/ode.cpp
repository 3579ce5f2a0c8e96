#include "weaves/apps/ode.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

#include "weaves/error.hpp"
#include "weaves/runtime.hpp"
#include "weaves/value.hpp"

namespace weaves::apps {

OdeProblem stiff_cosine_problem(double lambda) {
  OdeProblem p;
  p.name = "stiff-cosine-" + std::to_string(static_cast<long long>(lambda));
  p.f = [lambda](double t, double y) { return -lambda * (y - std::cos(t)); };
  p.y0 = 0.0;
  p.t0 = 0.0;
  p.t1 = 3.0;
  p.exact = [lambda](double t) {
    const double l2 = lambda * lambda;
    return (l2 * std::cos(t) + lambda * std::sin(t)) / (l2 + 1.0) - l2 / (l2 + 1.0) * std::exp(-lambda * t);
  };
  return p;
}

OdeProblem decay_problem() {
  OdeProblem p;
  p.name = "decay";
  p.f = [](double, double y) { return -y; };
  p.y0 = 1.0;
  p.t0 = 0.0;
  p.t1 = 3.0;
  p.exact = [](double t) { return std::exp(-t); };
  return p;
}

std::vector<OdeProblem> ode_training_family() {
  return {stiff_cosine_problem(200.0), stiff_cosine_problem(500.0), stiff_cosine_problem(1000.0),
          stiff_cosine_problem(2000.0), decay_problem()};
}

std::string_view method_name(OdeMethod m) { return m == OdeMethod::Explicit ? "non-stiff" : "stiff"; }

std::string stiffness_bin(double ratio) {
  if (ratio < 0.5) return "non-stiff";
  if (ratio < 0.9) return "near-stiff";
  return "stiff";
}

FeatureState ode_state(double ratio, OdeMethod current, double growth) {
  return FeatureState{{"state", stiffness_bin(ratio)},
                      {"algorithm", std::string(method_name(current))},
                      {"steps", growth >= 2.0 ? "growing" : "stalled"}};
}

std::vector<Action> ode_actions(OdeMethod current) {
  return {Action{ActionKind::SwitchAlgorithm, "stay"},
          Action{ActionKind::SwitchAlgorithm,
                 current == OdeMethod::Explicit ? "switch-to-stiff" : "switch-to-non-stiff"}};
}

namespace {

constexpr const char* kSignature = "()->(f64)";

/// Counts right-hand side calls outside the runtime state.
struct Rhs {
  const OdeProblem* problem;
  std::uint64_t count = 0;
  double operator()(double t, double y) {
    ++count;
    return problem->f(t, y);
  }
};

/// Shared bookkeeping after an attempt with error estimate `err` of the
/// given order; returns 1 when the step was accepted.
double finish_attempt(StringContext& ctx, Rhs& rhs, double h, double ynew, std::optional<double> fnew, double err,
                      double order) {
  const double tol = ctx.read_f64("tol");
  ctx.write_i64("attempts", ctx.read_i64("attempts") + 1);
  const double fac = std::isfinite(err) ? 0.9 * std::pow(tol / std::max(err, 1e-300), 1.0 / order) : 0.2;
  if (std::isfinite(err) && err <= tol) {
    const double t = ctx.read_f64("t");
    auto hist = ctx.read_f64s("hist");
    std::vector<double> next = {t, ctx.read_f64("fn")};
    if (hist.size() >= 2) next.insert(next.end(), hist.begin(), hist.begin() + 2);
    ctx.write_f64s("hist", next);
    const double tn = t + h;
    ctx.write_f64("t", tn);
    ctx.write_f64("y", ynew);
    ctx.write_f64("fn", fnew ? *fnew : rhs(tn, ynew));
    ctx.write_f64("h", h * std::clamp(fac, 0.2, 5.0));
    ctx.write_i64("accepted", ctx.read_i64("accepted") + 1);
    return 1.0;
  }
  const double hn = h * std::clamp(fac, 0.2, 1.0);
  const double t = ctx.read_f64("t");
  if (hn < 1e-14 * std::max(1.0, std::fabs(t)))
    throw Error(ErrorCode::StepUnderflow, "step size underflow at t=" + std::to_string(t));
  ctx.write_f64("h", hn);
  return 0.0;
}

double next_h(StringContext& ctx) {
  return std::min({ctx.read_f64("h"), ctx.read_f64("t1") - ctx.read_f64("t"), ctx.read_f64("hmax")});
}

/// Variable-step two-step Adams-Bashforth. The error estimate uses the
/// method's local truncation term with y''' from divided differences of
/// past slopes; the first step is Euler with a trapezoid comparison.
std::vector<double> explicit_step(StringContext& ctx, Rhs& rhs) {
  ctx.write_i64("method", 0);
  const double h = next_h(ctx);
  const double t = ctx.read_f64("t");
  const double y = ctx.read_f64("y");
  const double fn = ctx.read_f64("fn");
  const auto hist = ctx.read_f64s("hist");
  if (hist.empty()) {
    const double ynew = y + h * fn;
    const double fnew = rhs(t + h, ynew);
    return {finish_attempt(ctx, rhs, h, ynew, fnew, std::fabs(h * (fnew - fn) / 2.0), 2.0)};
  }
  const double tp = hist[0];
  const double fp = hist[1];
  const double w = h / (2.0 * (t - tp));
  const double ynew = y + h * ((1.0 + w) * fn - w * fp);
  double err = std::fabs(ynew - (y + h * fn));
  double order = 2.0;
  if (hist.size() >= 4) {
    const double tpp = hist[2];
    const double fpp = hist[3];
    const double d1 = (fn - fp) / (t - tp);
    const double d2 = (fp - fpp) / (tp - tpp);
    const double dd = (d1 - d2) / (t - tpp);
    err = 5.0 / 12.0 * h * h * h * std::fabs(2.0 * dd);
    order = 3.0;
  }
  return {finish_attempt(ctx, rhs, h, ynew, std::nullopt, err, order)};
}

/// Backward Euler with Newton iterations on a difference Jacobian. The
/// local error estimate is filtered through (1 - hJ)^-1, which keeps it
/// meaningful once hJ is large.
std::vector<double> implicit_step(StringContext& ctx, Rhs& rhs) {
  ctx.write_i64("method", 1);
  const double h = next_h(ctx);
  const double t = ctx.read_f64("t");
  const double y = ctx.read_f64("y");
  const double fn = ctx.read_f64("fn");
  double z = y + h * fn;
  double jac = 0.0;
  double fz = 0.0;
  bool converged = false;
  for (int it = 0; it < 10; ++it) {
    fz = rhs(t + h, z);
    const double d = 1e-7 * (1.0 + std::fabs(z));
    jac = (rhs(t + h, z + d) - fz) / d;
    const double dz = (z - y - h * fz) / (1.0 - h * jac);
    z -= dz;
    if (std::fabs(dz) < 1e-12 * (1.0 + std::fabs(z))) {
      converged = true;
      break;
    }
  }
  double err = std::fabs(z - (y + h * fn)) / 2.0 / std::fabs(1.0 - h * jac);
  if (!converged) err = std::numeric_limits<double>::infinity();
  return {finish_attempt(ctx, rhs, h, z, std::nullopt, err, 2.0)};
}

ModuleDef ode_module(const OdeProblem& p, const OdeOptions& o, Rhs& rhs) {
  const double f0 = rhs(p.t0, p.y0);
  const double span = p.t1 - p.t0;
  double h0 = 0.1 * std::max(std::fabs(p.y0), 1e-3) / std::max(std::fabs(f0), 1e-12);
  h0 = std::min(h0, 0.01 * span);
  ModuleDef m;
  m.name = "ode";
  m.globals = {{"t", value::from_f64(p.t0)},       {"t1", value::from_f64(p.t1)},
               {"y", value::from_f64(p.y0)},       {"fn", value::from_f64(f0)},
               {"h", value::from_f64(h0)},         {"hmax", value::from_f64(span / 10.0)},
               {"tol", value::from_f64(o.tolerance)}, {"hist", value::from_f64s({})},
               {"method", value::from_i64(0)},     {"attempts", value::from_i64(0)},
               {"accepted", value::from_i64(0)}};
  auto ex = [&rhs](StringContext& ctx, std::span<const double>) { return explicit_step(ctx, rhs); };
  auto im = [&rhs](StringContext& ctx, std::span<const double>) { return implicit_step(ctx, rhs); };
  m.functions = {{"step", kSignature, ex}, {"adams-bashforth2", kSignature, ex}, {"backward-euler", kSignature, im}};
  m.entries = {{"integrate", [](StringContext& ctx) {
                  if (ctx.read_f64("t1") - ctx.read_f64("t") <= 1e-12 * std::max(1.0, std::fabs(ctx.read_f64("t1"))))
                    return StepStatus::Finished;
                  ctx.call("step");
                  return StepStatus::Yield;
                }}};
  return m;
}

OdeResult integrate(const OdeProblem& p, QPolicy* policy, OdeMethod initial, const OdeOptions& o) {
  if (!(p.t0 < p.t1)) throw Error(ErrorCode::InvalidArgument, "ode span must be ordered");
  if (!(o.tolerance > 0.0) || o.check_every == 0) throw Error(ErrorCode::InvalidArgument, "bad ode options");
  Rhs rhs{&p};
  RuntimeConfig rc;
  rc.scheduler.record_trace = false;
  Runtime rt(rc);
  rt.register_module(ode_module(p, o, rhs));
  WeaveId w = rt.define_weave({rt.instantiate_bead("ode", "ode")}, "ode");
  auto rebind = [&](OdeMethod m) {
    rt.submit(command::Rebind{"ode", "step", "ode", m == OdeMethod::Explicit ? "adams-bashforth2" : "backward-euler"});
  };
  OdeMethod current = initial;
  if (current != OdeMethod::Explicit) rebind(current);
  StringId s = rt.spawn_string(w, "integrate");

  OdeResult res;
  res.samples.emplace_back(p.t0, p.y0);
  std::int64_t seen = 0;
  double h_before = rt.read_f64(w, "h");
  double h_window = 0.0;  // largest step size proposed since the last decision
  // Each decision is rewarded with the negative log of the step attempts
  // per unit of scaled time (t |df/dy|) over the next `horizon` accepted
  // steps of the trajectory it led to.
  struct Pending {
    FeatureState state;
    Action action;
    std::int64_t attempts;
    double t;
    double scale;
    std::int64_t due;
  };
  std::deque<Pending> pending;
  const std::int64_t horizon = static_cast<std::int64_t>(o.check_every);
  auto settle = [&](double t_now, std::int64_t acc, bool all) {
    while (!pending.empty() && (all || pending.front().due <= acc)) {
      const Pending& d = pending.front();
      const double dt = std::max(t_now - d.t, 1e-12);
      const double steps = std::max<double>(1.0, static_cast<double>(rt.read_i64(w, "attempts") - d.attempts));
      policy->update(d.state, d.action, -std::log10(steps / (dt * d.scale)), nullptr, {});
      pending.pop_front();
    }
  };

  while (rt.tapestry().string(s).live()) {
    rt.dispatch_once();
    if (!rt.command_errors().empty()) throw Error(ErrorCode::InvalidArgument, rt.command_errors().front());
    if (static_cast<std::uint64_t>(rt.read_i64(w, "attempts")) > o.max_attempts)
      throw Error(ErrorCode::BudgetExceeded, p.name + ": more than " + std::to_string(o.max_attempts) + " steps");
    const std::int64_t acc = rt.read_i64(w, "accepted");
    if (acc == seen) continue;
    seen = acc;
    const double t = rt.read_f64(w, "t");
    const double y = rt.read_f64(w, "y");
    res.samples.emplace_back(t, y);
    h_window = std::max(h_window, std::min(rt.read_f64(w, "h"), rt.read_f64(w, "hmax")));
    if (policy && o.learn) settle(t, acc, false);
    if (!policy || acc % o.check_every != 0 || t >= p.t1) continue;

    const double fn = rt.read_f64(w, "fn");
    const double d = 1e-7 * (1.0 + std::fabs(y));
    const double jac = (rhs(t, y + d) - fn) / d;
    const double h = std::min(rt.read_f64(w, "h"), rt.read_f64(w, "hmax"));
    FeatureState state = ode_state(h_window * std::fabs(jac), current, h / h_before);
    h_before = h;
    h_window = 0.0;
    auto legal = ode_actions(current);
    Action act = policy->select(state, legal);
    if (o.learn) pending.push_back(Pending{state, act, rt.read_i64(w, "attempts"), t, std::max(std::fabs(jac), 1.0 / (p.t1 - p.t0)), acc + horizon});
    res.decisions.push_back(OdeDecision{t, state, act.name});
    if (act.name == "stay") continue;
    OdeMethod next = current == OdeMethod::Explicit ? OdeMethod::Implicit : OdeMethod::Explicit;
    rebind(next);
    res.switches.push_back(OdeSwitch{t, current, next});
    current = next;
  }
  if (rt.tapestry().string(s).state.status != StringStatus::Finished)
    throw Error(ErrorCode::InvalidArgument, "ode string failed");
  res.t = rt.read_f64(w, "t");
  res.y = rt.read_f64(w, "y");
  if (policy && o.learn) settle(res.t, 0, true);
  res.steps = static_cast<std::uint64_t>(rt.read_i64(w, "attempts"));
  res.accepted = static_cast<std::uint64_t>(rt.read_i64(w, "accepted"));
  res.evaluations = rhs.count;
  return res;
}

}  // namespace

OdeResult integrate_ode_switching(const OdeProblem& p, QPolicy& policy, const OdeOptions& options) {
  return integrate(p, &policy, OdeMethod::Explicit, options);
}

OdeResult integrate_ode_fixed(const OdeProblem& p, OdeMethod method, const OdeOptions& options) {
  return integrate(p, nullptr, method, options);
}

OdeTraining train_ode_switching(QPolicy& policy, const std::vector<OdeProblem>& problems, std::size_t episodes,
                                std::size_t explore_episodes, const OdeOptions& options) {
  if (problems.empty()) throw Error(ErrorCode::InvalidArgument, "no training problems");
  OdeOptions o = options;
  o.learn = true;
  OdeTraining curve;
  curve.flip = explore_episodes;
  policy.set_mode(PolicyMode::Explore);
  for (std::size_t e = 0; e < episodes; ++e) {
    if (e == explore_episodes) policy.set_mode(PolicyMode::Exploit);
    policy.begin_episode();
    curve.evaluations.push_back(integrate_ode_switching(problems[e % problems.size()], policy, o).evaluations);
  }
  return curve;
}

}  // namespace weaves::apps
