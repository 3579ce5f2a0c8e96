#include "weaves/apps/pde.hpp"

#include <cmath>
#include <numbers>

#include "weaves/error.hpp"
#include "weaves/value.hpp"

namespace weaves::apps {

double source_value(SourceKind k, double x) {
  switch (k) {
    case SourceKind::Zero: return 0.0;
    case SourceKind::One: return 1.0;
    case SourceKind::Sine: return std::numbers::pi * std::numbers::pi * std::sin(std::numbers::pi * x);
  }
  return 0.0;
}

double exact_solution(SourceKind k, double ua, double ub, double x) {
  double linear = ua + (ub - ua) * x;
  switch (k) {
    case SourceKind::Zero: return linear;
    case SourceKind::One: return linear + x * (1.0 - x) / 2.0;
    case SourceKind::Sine: return linear + std::sin(std::numbers::pi * x);
  }
  return linear;
}

namespace {

std::vector<double> solve_poisson(double lo, double hi, double u_lo, double u_hi, std::uint32_t n, SourceKind src) {
  std::vector<double> u(n, 0.0);
  u.front() = u_lo;
  u.back() = u_hi;
  const std::size_t m = n - 2;
  if (m == 0) return u;
  const double h = (hi - lo) / static_cast<double>(n - 1);
  // Thomas algorithm on the interior: -u[i-1] + 2u[i] - u[i+1] = h^2 f(x_i).
  std::vector<double> c(m), d(m);
  for (std::size_t i = 0; i < m; ++i) {
    double x = lo + h * static_cast<double>(i + 1);
    double rhs = h * h * source_value(src, x);
    if (i == 0) rhs += u_lo;
    if (i == m - 1) rhs += u_hi;
    double denom = i > 0 ? 2.0 + c[i - 1] : 2.0;
    c[i] = -1.0 / denom;
    d[i] = (rhs + (i > 0 ? d[i - 1] : 0.0)) / denom;
  }
  u[m] = d[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) u[i + 1] = d[i] - c[i] * u[i + 2];
  return u;
}

// Flux-consistent one-sided derivative: the source correction makes the
// converged interface satisfy the same three-point stencil as the interior.
double interface_derivative(const std::vector<double>& u, double h, int side, double f_end) {
  const std::size_t n = u.size();
  if (side == 0) return (u[n - 1] - u[n - 2]) / h - 0.5 * h * f_end;
  return (u[1] - u[0]) / h + 0.5 * h * f_end;
}

enum MediatorState : std::int64_t { kRunning = 0, kConverged = 1, kGaveUp = 2 };

StepStatus solve_step(StringContext& ctx) {
  Frame& f = ctx.frame();
  if (f.pc == 0) {
    auto n = static_cast<std::uint64_t>(ctx.read_i64("n"));
    Address work = ctx.alloc(n * 8);
    ctx.write("work", value::from_u64(work));
    f.set_i64("r", 0);
    f.pc = 1;
    return StepStatus::Continue;
  }
  auto iface = ctx.call("interface");
  const double g = iface[0];
  const auto round = static_cast<std::int64_t>(iface[1]);
  const auto state = static_cast<std::int64_t>(iface[2]);
  Frame& fr = ctx.frame();
  const std::int64_t r = fr.get_i64("r");
  if (state == kRunning && round < r) return StepStatus::Yield;  // waiting for the other side

  const int side = static_cast<int>(ctx.read_i64("side"));
  const double lo = ctx.read_f64("lo");
  const double hi = ctx.read_f64("hi");
  const double outer = ctx.read_f64("u_out");
  const auto n = static_cast<std::uint32_t>(ctx.read_i64("n"));
  const auto src = static_cast<SourceKind>(ctx.read_i64("source"));
  std::vector<double> u = side == 0 ? solve_poisson(lo, hi, outer, g, n, src) : solve_poisson(lo, hi, g, outer, n, src);
  ctx.write_f64s("u", u);
  ctx.write_at(value::to_u64(ctx.read("work")), value::from_f64s(u));
  if (state != kRunning) return StepStatus::Finished;

  const double h = (hi - lo) / static_cast<double>(n - 1);
  const double f_end = source_value(src, side == 0 ? hi : lo);
  ctx.call("report", {static_cast<double>(side), interface_derivative(u, h, side, f_end), hi - lo});
  ctx.frame().set_i64("r", r + 1);
  return StepStatus::Continue;
}

std::vector<double> report_fn(StringContext& ctx, std::span<const double> args) {
  if (args.size() != 3) throw Error(ErrorCode::SignatureMismatch, "report takes (side, deriv, len)");
  if (ctx.read_i64("m_state") != kRunning) return {};
  std::int64_t have = ctx.read_i64("m_have");
  if (args[0] == 0.0) {
    ctx.write_f64("m_dl", args[1]);
    ctx.write_f64("m_len_l", args[2]);
    have |= 1;
  } else {
    ctx.write_f64("m_dr", args[1]);
    ctx.write_f64("m_len_r", args[2]);
    have |= 2;
  }
  if (have != 3) {
    ctx.write_i64("m_have", have);
    return {};
  }
  const double g = ctx.read_f64("m_g");
  const double s = 1.0 / (1.0 / ctx.read_f64("m_len_l") + 1.0 / ctx.read_f64("m_len_r"));
  const double next = g - ctx.read_f64("m_theta") * s * (ctx.read_f64("m_dl") - ctx.read_f64("m_dr"));
  const std::int64_t round = ctx.read_i64("m_round") + 1;
  ctx.write_f64("m_g", next);
  ctx.write_i64("m_round", round);
  ctx.write_i64("m_have", 0);
  auto hist = ctx.read_f64s("m_hist");
  hist.push_back(next);
  ctx.write_f64s("m_hist", hist);
  if (std::fabs(next - g) < ctx.read_f64("m_tol"))
    ctx.write_i64("m_state", kConverged);
  else if (round >= ctx.read_i64("m_max"))
    ctx.write_i64("m_state", kGaveUp);
  return {};
}

std::vector<double> interface_fn(StringContext& ctx, std::span<const double>) {
  return {ctx.read_f64("m_g"), static_cast<double>(ctx.read_i64("m_round")),
          static_cast<double>(ctx.read_i64("m_state"))};
}

}  // namespace

ModuleDef poisson_module() {
  ModuleDef m;
  m.name = "poisson";
  m.globals = {{"lo", value::from_f64(0.0)},     {"hi", value::from_f64(0.5)},
               {"u_out", value::from_f64(0.0)},  {"n", value::from_i64(33)},
               {"side", value::from_i64(0)},     {"source", value::from_i64(0)},
               {"u", value::from_f64s({})},      {"work", value::from_u64(0)}};
  m.entries = {{"solve", solve_step}};
  return m;
}

ModuleDef mediator_module() {
  ModuleDef m;
  m.name = "mediator";
  m.globals = {{"m_g", value::from_f64(0.0)},     {"m_theta", value::from_f64(0.5)},
               {"m_tol", value::from_f64(1e-10)}, {"m_max", value::from_i64(500)},
               {"m_round", value::from_i64(0)},   {"m_state", value::from_i64(kRunning)},
               {"m_dl", value::from_f64(0.0)},    {"m_dr", value::from_f64(0.0)},
               {"m_len_l", value::from_f64(0.5)}, {"m_len_r", value::from_f64(0.5)},
               {"m_have", value::from_i64(0)},    {"m_hist", value::from_f64s({})}};
  m.functions = {{"report", "(f64,f64,f64)->()", report_fn}, {"interface", "()->(f64,f64,f64)", interface_fn}};
  return m;
}

void configure_solver(Runtime& rt, WeaveId weave, const PdeDomainSpec& spec, int side) {
  if (spec.n < 3) throw Error(ErrorCode::InvalidArgument, "a subdomain needs at least 3 grid points");
  if (!(spec.lo < spec.hi)) throw Error(ErrorCode::InvalidArgument, "subdomain bounds must be ordered");
  rt.write(weave, "lo", value::from_f64(spec.lo));
  rt.write(weave, "hi", value::from_f64(spec.hi));
  rt.write(weave, "u_out", value::from_f64(spec.boundary));
  rt.write(weave, "n", value::from_i64(spec.n));
  rt.write(weave, "side", value::from_i64(side));
  rt.write(weave, "source", value::from_i64(static_cast<std::int64_t>(spec.source)));
}

void configure_mediator(Runtime& rt, WeaveId weave, const MediatorConfig& cfg) {
  if (!(cfg.theta > 0.0 && cfg.theta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "theta must lie in (0,1]");
  if (!(cfg.tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  rt.write(weave, "m_g", value::from_f64(cfg.initial));
  rt.write(weave, "m_theta", value::from_f64(cfg.theta));
  rt.write(weave, "m_tol", value::from_f64(cfg.tolerance));
  rt.write(weave, "m_max", value::from_i64(cfg.max_iterations));
}

PdePair build_pde_pair(Runtime& rt, const PdeDomainSpec& left, const PdeDomainSpec& right, const MediatorConfig& cfg,
                       const std::string& suffix) {
  if (!rt.tapestry().find_module("poisson")) rt.register_module(poisson_module());
  if (!rt.tapestry().find_module("mediator")) rt.register_module(mediator_module());
  if (left.hi != right.lo) throw Error(ErrorCode::InvalidArgument, "subdomains must meet at the interface");
  PdePair p{"S" + suffix + "L", "S" + suffix + "R", "M" + suffix, "W" + suffix + "L", "W" + suffix + "R"};
  BeadId l = rt.instantiate_bead("poisson", p.left);
  BeadId r = rt.instantiate_bead("poisson", p.right);
  BeadId m = rt.instantiate_bead("mediator", p.mediator);
  WeaveId wl = rt.define_weave({l, m}, p.left_weave);
  WeaveId wr = rt.define_weave({r, m}, p.right_weave);
  configure_solver(rt, wl, left, 0);
  configure_solver(rt, wr, right, 1);
  configure_mediator(rt, wl, cfg);
  rt.write(wl, "m_len_l", value::from_f64(left.hi - left.lo));
  rt.write(wl, "m_len_r", value::from_f64(right.hi - right.lo));
  rt.spawn_string(wl, "solve");
  rt.spawn_string(wr, "solve");
  return p;
}

PdeResult read_pde_result(const Runtime& rt, const PdePair& pair) {
  auto wl = rt.tapestry().find_weave(pair.left_weave);
  auto wr = rt.tapestry().find_weave(pair.right_weave);
  if (!wl || !wr) throw Error(ErrorCode::UnknownWeave, "pair weaves not found");
  if (rt.read_i64(*wl, "m_state") == kGaveUp)
    throw Error(ErrorCode::NoConvergence, "interface value did not settle within " +
                                              std::to_string(rt.read_i64(*wl, "m_max")) + " iterations");
  PdeResult res;
  res.left = rt.read_f64s(*wl, "u");
  res.right = rt.read_f64s(*wr, "u");
  res.interface = rt.read_f64(*wl, "m_g");
  res.iterations = static_cast<std::uint32_t>(rt.read_i64(*wl, "m_round"));
  res.history = rt.read_f64s(*wl, "m_hist");
  return res;
}

PdeResult solve_mediated_pde(const PdeDomainSpec& left, const PdeDomainSpec& right, const MediatorConfig& cfg,
                             const SchedulerConfig& scheduler) {
  RuntimeConfig rc;
  rc.scheduler = scheduler;
  rc.scheduler.record_trace = false;
  Runtime rt(rc);
  PdePair pair = build_pde_pair(rt, left, right, cfg);
  rt.run();
  return read_pde_result(rt, pair);
}

std::pair<PdeDomainSpec, PdeDomainSpec> unit_problem(SourceKind source, double ua, double ub, std::uint32_t n) {
  return {PdeDomainSpec{0.0, 0.5, ua, n, source}, PdeDomainSpec{0.5, 1.0, ub, n, source}};
}

PdeGridOutcome run_pde_on_grid(const PdeDomainSpec& left, const PdeDomainSpec& right, const MediatorConfig& cfg,
                               std::optional<std::uint64_t> migrate_at, std::uint32_t steps_per_tick) {
  GridConfig gc;
  gc.ranks = 2;
  gc.steps_per_tick = steps_per_tick;
  gc.scheduler.record_trace = false;
  Grid grid(gc);
  PdePair pair = build_pde_pair(grid.rank(0), left, right, cfg);
  grid.rank(1).register_module(poisson_module());
  grid.rank(1).register_module(mediator_module());
  if (migrate_at) {
    GridEvent e;
    e.kind = GridEvent::Kind::Migrate;
    e.tick = *migrate_at;
    e.from_rank = 0;
    e.to_rank = 1;
    e.beads = {pair.left, pair.right, pair.mediator};
    grid.schedule(e);
  }
  const std::uint64_t cap = 1'000'000;
  if (!grid.run(cap)) throw Error(ErrorCode::NoConvergence, "grid run did not finish");
  PdeGridOutcome out;
  out.final_rank = grid.rank(1).tapestry().find_weave(pair.left_weave) ? 1 : 0;
  out.result = read_pde_result(grid.rank(out.final_rank), pair);
  out.log = grid.log();
  out.ticks = grid.now();
  return out;
}

}  // namespace weaves::apps
