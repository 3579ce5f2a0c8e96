#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "weaves/recommender.hpp"

namespace weaves::apps {

enum class QuadRule : std::uint8_t { Midpoint, Trapezoid, Simpson, Gauss5, FragileGauss5 };

std::string_view rule_name(QuadRule r);
/// Integrand evaluations one application of the rule costs.
std::uint32_t rule_points(QuadRule r);
inline const std::vector<QuadRule> kStandardRules = {QuadRule::Midpoint, QuadRule::Trapezoid, QuadRule::Simpson,
                                                      QuadRule::Gauss5};

struct QuadratureProblem {
  std::string name;
  std::function<double(double)> f;
  double a = 0.0;
  double b = 1.0;
  double tolerance = 1e-6;
  std::optional<double> singular_at;  // where the integrand blows up, if anywhere
  std::optional<double> exact;
};

/// x^-beta + cos(kx) on [0,1] with beta = 0.1 + 0.05 i and k = 1 + i.
QuadratureProblem singular_problem(std::uint32_t i, double tolerance = 1e-6);
std::vector<QuadratureProblem> singular_family(std::uint32_t count = 10, double tolerance = 1e-6);

/// One rule application on one subinterval.
struct QuadDecision {
  std::int64_t node = -1;  // subinterval identity; retries keep the node
  double a = 0.0;
  double b = 0.0;
  FeatureState state;
  std::string action;
  bool failed = false;
  std::uint64_t evaluations = 0;
  std::vector<std::string> history;  // invocation history seen at a failure
};

struct QuadratureResult {
  double value = 0.0;
  std::uint64_t evaluations = 0;  // integrand calls, failed attempts included
  std::vector<QuadDecision> trace;
  std::uint32_t rollbacks = 0;
};

struct QuadratureOptions {
  std::vector<QuadRule> rules = kStandardRules;
  /// The run stops once the summed error estimate is below
  /// safety * tolerance; the pairwise estimate is optimistic next to an
  /// endpoint singularity.
  double safety = 0.1;
  std::uint64_t budget = 200'000;
  bool learn = false;
  double cost_scale = 1000.0;  // evaluations per unit of negative reward
};

/// Feature state of a subinterval: stage=interval plus edge in
/// {singular, near, far} relative to the problem's singular point.
FeatureState interval_state(const QuadratureProblem& p, double a, double b);

/// Globally adaptive quadrature run as a string. Before every rule choice
/// the driver takes a copy-on-write checkpoint of the string; a rule that
/// produces a non-finite value is rolled back, pruned, and the choice is
/// made again. With options.learn the policy is updated with the negative
/// cost of each decision's subtree. Throws BudgetExceeded, NoLegalAction.
QuadratureResult integrate_adaptive_quadrature(const QuadratureProblem& p, QPolicy& policy,
                                               const QuadratureOptions& options = {});

/// The same algorithm with one rule everywhere; throws NoLegalAction when
/// that rule fails.
QuadratureResult integrate_fixed_rule(const QuadratureProblem& p, QuadRule rule, QuadratureOptions options = {});

struct FixedRuleSummary {
  QuadRule rule = QuadRule::Midpoint;
  /// Mean evaluations over the family; a run that exceeded the budget
  /// counts as the budget, so the mean is a lower bound when exceeded > 0.
  double mean_evaluations = 0.0;
  std::uint32_t exceeded = 0;  // runs stopped by the budget
  std::uint32_t failed = 0;    // runs where the rule produced a non-finite value
};

/// Runs one rule everywhere on every problem. Failures are counted rather
/// than thrown.
FixedRuleSummary summarize_fixed_rule(const std::vector<QuadratureProblem>& problems, QuadRule rule,
                                      const QuadratureOptions& options = {});

struct TrainingCurve {
  std::vector<std::uint64_t> evaluations;  // per episode
  std::size_t flip = 0;                    // first exploit episode
};

/// Cycles through the problems for `episodes` episodes, switching the
/// policy from explore to exploit mode after `explore_episodes`.
TrainingCurve train_quadrature(QPolicy& policy, const std::vector<QuadratureProblem>& problems,
                               std::size_t episodes, std::size_t explore_episodes,
                               const QuadratureOptions& options = {});

}  // namespace weaves::apps
