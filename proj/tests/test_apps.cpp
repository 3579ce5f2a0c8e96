#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "weaves/apps/delay.hpp"
#include "weaves/apps/ode.hpp"
#include "weaves/apps/pde.hpp"
#include "weaves/apps/quadrature.hpp"
#include "weaves/error.hpp"

using namespace weaves;
using namespace weaves::apps;

namespace {

double max_error(const PdeResult& r, const PdeDomainSpec& l, const PdeDomainSpec& rt, SourceKind k) {
  double e = 0.0;
  auto scan = [&](const std::vector<double>& u, const PdeDomainSpec& d) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      double x = d.lo + (d.hi - d.lo) * double(i) / double(u.size() - 1);
      e = std::max(e, std::abs(u[i] - exact_solution(k, 0.0, 0.0, x)));
    }
  };
  scan(r.left, l);
  scan(r.right, rt);
  return e;
}

}  // namespace

TEST_CASE("PDE: Laplace interface 0.5 and exact linear solution") {
  auto [l, r] = unit_problem(SourceKind::Zero, 0.0, 1.0, 33);
  auto res = solve_mediated_pde(l, r, {});
  CHECK(std::abs(res.interface - 0.5) < 1e-6);
  for (std::size_t i = 0; i < res.left.size(); ++i) CHECK(std::abs(res.left[i] - 0.5 * double(i) / 32.0) < 1e-6);
}

TEST_CASE("PDE: unit source interface 0.125") {
  auto [l, r] = unit_problem(SourceKind::One, 0.0, 0.0, 33);
  auto res = solve_mediated_pde(l, r, {});
  CHECK(std::abs(res.interface - 0.125) < 1e-6);
}

TEST_CASE("PDE: symmetric problem with the exact initial guess converges in one iteration") {
  auto [l, r] = unit_problem(SourceKind::Zero, 1.0, 1.0, 17);
  MediatorConfig mc;
  mc.initial = 1.0;
  auto res = solve_mediated_pde(l, r, mc);
  CHECK(res.iterations == 1);
  CHECK(std::abs(res.interface - 1.0) < 1e-12);
}

TEST_CASE("PDE: second-order convergence with the sine source") {
  std::vector<double> errs;
  for (std::uint32_t n : {9, 17, 33, 65}) {
    auto [l, r] = unit_problem(SourceKind::Sine, 0.0, 0.0, n);
    MediatorConfig mc;
    mc.tolerance = 1e-13;
    mc.max_iterations = 5000;
    errs.push_back(max_error(solve_mediated_pde(l, r, mc), l, r, SourceKind::Sine));
  }
  for (std::size_t i = 1; i < errs.size(); ++i) {
    double ratio = errs[i - 1] / errs[i];
    CHECK(std::abs(ratio - 4.0) <= 0.8);
  }
}

TEST_CASE("PDE: iteration cap reports NoConvergence") {
  auto [l, r] = unit_problem(SourceKind::One, 0.0, 0.0, 17);
  MediatorConfig mc;
  mc.max_iterations = 2;
  CHECK_THROWS_AS(solve_mediated_pde(l, r, mc), Error);
}

TEST_CASE("quadrature: polynomial exactness on one interval") {
  QuadratureProblem p;
  p.name = "x";
  p.f = [](double x) { return x; };
  p.exact = 0.5;
  for (QuadRule rule : kStandardRules) {
    auto r = integrate_fixed_rule(p, rule);
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("quadrature: evaluation counter equals integrand calls") {
  std::uint64_t calls = 0;
  QuadratureProblem p;
  p.name = "counted";
  p.f = [&calls](double x) {
    ++calls;
    return std::sin(3 * x);
  };
  p.exact = (1 - std::cos(3.0)) / 3.0;
  auto r = integrate_fixed_rule(p, QuadRule::Simpson);
  CHECK(r.evaluations == calls);
  CHECK(std::abs(r.value - *p.exact) <= p.tolerance);
}

TEST_CASE("quadrature: 1/sqrt(x) learned policy beats the best fixed rule") {
  QuadratureProblem p;
  p.name = "inv-sqrt";
  p.f = [](double x) { return 1.0 / std::sqrt(x); };
  p.singular_at = 0.0;
  p.exact = 2.0;
  QuadratureOptions budget;
  budget.budget = 20000;
  double best = 1e300;
  for (QuadRule rule : kStandardRules) {
    auto s = summarize_fixed_rule({p}, rule, budget);
    if (s.failed == 0 && s.exceeded == 0) best = std::min(best, s.mean_evaluations);
  }
  REQUIRE(best < 1e300);
  QConfig cfg;
  cfg.seed = 2;
  QPolicy policy(cfg);
  auto curve = train_quadrature(policy, {p}, 60, 40);
  policy.set_epsilon(0.0);
  auto r = integrate_adaptive_quadrature(p, policy);
  CHECK(std::abs(r.value - 2.0) <= p.tolerance);
  CHECK(double(r.evaluations) <= best);
  double pre = 0, post = 0;
  for (std::size_t i = 0; i < curve.evaluations.size(); ++i) (i < curve.flip ? pre : post) += double(curve.evaluations[i]);
  CHECK(post / double(curve.evaluations.size() - curve.flip) <= pre / double(curve.flip));
}

TEST_CASE("quadrature: failing rule is never retried on its subinterval") {
  auto family = singular_family(4);
  QuadratureOptions opts;
  opts.rules = {QuadRule::FragileGauss5, QuadRule::Midpoint, QuadRule::Gauss5, QuadRule::Simpson};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (const auto& p : family) {
      // A fresh policy biased toward the fragile rule everywhere; pruning persists across episodes.
      QConfig cfg;
      cfg.seed = seed;
      QPolicy policy(cfg);
      policy.set_epsilon(0.0);
      for (const char* edge : {"singular", "near", "far"})
        policy.set_q(FeatureState{{"stage", "interval"}, {"edge", edge}}, {ActionKind::ChooseModule, "gauss5-fragile"},
                     10.0);
      auto r = integrate_adaptive_quadrature(p, policy, opts);
      CHECK(std::abs(r.value - *p.exact) <= p.tolerance);
      CHECK(r.rollbacks > 0);
      std::map<std::int64_t, std::set<std::string>> failed;
      for (const auto& d : r.trace) {
        CHECK_FALSE(failed[d.node].count(d.action));
        if (d.failed) failed[d.node].insert(d.action);
      }
    }
  }
}

TEST_CASE("ODE: decay problem never switches and stays accurate") {
  QPolicy policy;
  train_ode_switching(policy, ode_training_family(), 150, 120);
  policy.set_epsilon(0.0);
  auto p = decay_problem();
  auto r = integrate_ode_switching(p, policy);
  CHECK(r.switches.empty());
  CHECK(std::abs(r.y - std::exp(-3.0)) < 10 * OdeOptions{}.tolerance);

  auto stiff = stiff_cosine_problem();
  auto ex = integrate_ode_fixed(stiff, OdeMethod::Explicit);
  auto sw = integrate_ode_switching(stiff, policy);
  CHECK(double(ex.steps) >= 50.0 * double(sw.steps));
  CHECK(std::abs(sw.y - stiff.exact(stiff.t1)) <= OdeOptions{}.tolerance);
  CHECK(std::abs(ex.y - stiff.exact(stiff.t1)) <= OdeOptions{}.tolerance);
  CHECK(std::abs(sw.y - ex.y) <= 2 * OdeOptions{}.tolerance);
  bool clause = false;
  for (const auto& rule : policy.extract_rules()) {
    const std::string* st = rule.state.get("state");
    const std::string* alg = rule.state.get("algorithm");
    clause |= st && *st == "near-stiff" && alg && *alg == "non-stiff" && rule.action.name == "switch-to-stiff";
  }
  CHECK(clause);
}

TEST_CASE("ODE: stiffness bins and actions") {
  CHECK(stiffness_bin(0.1) == "non-stiff");
  CHECK(stiffness_bin(0.7) == "near-stiff");
  CHECK(stiffness_bin(1.5) == "stiff");
  CHECK(ode_actions(OdeMethod::Explicit).size() == 2);
}

TEST_CASE("delay benchmark: structure of a short run") {
  DelayConfig cfg;
  cfg.target_seconds = 0.02;
  cfg.runs = 3;
  auto report = run_delay_benchmark({1, 4}, cfg);
  REQUIRE(report.points.size() == 2);
  CHECK(report.iterations > 0);
  for (const auto& pt : report.points) {
    CHECK(pt.seconds.size() == 3);
    CHECK(pt.dispatches >= pt.n);
    CHECK(pt.median > 0.0);
  }
  CHECK(delay_loop(1000, 3) == delay_loop(1000, 3));
}
