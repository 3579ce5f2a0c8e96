#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "weaves/recommender.hpp"

namespace weaves::apps {

/// Scalar initial value problem y' = f(t, y) on [t0, t1].
struct OdeProblem {
  std::string name;
  std::function<double(double, double)> f;
  double y0 = 0.0;
  double t0 = 0.0;
  double t1 = 1.0;
  std::function<double(double)> exact;  // optional reference solution
};

/// y' = -lambda (y - cos t), y(0) = 0 on [0, 3].
OdeProblem stiff_cosine_problem(double lambda = 1000.0);
/// y' = -y, y(0) = 1 on [0, 3].
OdeProblem decay_problem();

enum class OdeMethod : std::uint8_t { Explicit, Implicit };

std::string_view method_name(OdeMethod m);  // "non-stiff" / "stiff"

struct OdeOptions {
  double tolerance = 1e-3;          // absolute local error per step
  std::uint32_t check_every = 4;    // accepted steps between policy decisions
  std::uint64_t max_attempts = 1'000'000;
  bool learn = false;
};

struct OdeSwitch {
  double t = 0.0;
  OdeMethod from = OdeMethod::Explicit;
  OdeMethod to = OdeMethod::Explicit;
};

struct OdeDecision {
  double t = 0.0;
  FeatureState state;
  std::string action;
};

struct OdeResult {
  double t = 0.0;
  double y = 0.0;
  std::vector<std::pair<double, double>> samples;  // accepted (t, y)
  std::vector<OdeSwitch> switches;
  std::vector<OdeDecision> decisions;
  std::uint64_t steps = 0;     // step attempts, rejected ones included
  std::uint64_t accepted = 0;
  std::uint64_t evaluations = 0;  // right-hand side calls
};

/// Ratio h |df/dy| of the largest step proposed since the last decision
/// to the explicit method's stability boundary, binned as non-stiff
/// (< 0.5), near-stiff (< 0.9) or stiff.
std::string stiffness_bin(double ratio);
/// {state, algorithm, steps}; steps is "growing" when the step size at
/// least doubled since the previous decision (`growth` is that ratio),
/// else "stalled".
FeatureState ode_state(double ratio, OdeMethod current, double growth);
/// stay, switch-to-stiff, switch-to-non-stiff.
std::vector<Action> ode_actions(OdeMethod current);

/// Integrates with the variable-step two-step Adams-Bashforth method and
/// backward Euler, both exported by one module under the weave-local name
/// "step". Every `check_every` accepted steps the policy sees the
/// stiffness state and may switch methods, which rebinds "step" for the
/// integrating weave. With options.learn each decision is rewarded with
/// the negative log of step attempts per unit of t |df/dy| over the next
/// check_every accepted steps.
/// Throws StepUnderflow, BudgetExceeded.
OdeResult integrate_ode_switching(const OdeProblem& p, QPolicy& policy, const OdeOptions& options = {});

/// The same integrator with one method throughout.
OdeResult integrate_ode_fixed(const OdeProblem& p, OdeMethod method, const OdeOptions& options = {});

struct OdeTraining {
  std::vector<std::uint64_t> evaluations;  // per episode
  std::size_t flip = 0;
};

OdeTraining train_ode_switching(QPolicy& policy, const std::vector<OdeProblem>& problems, std::size_t episodes,
                                std::size_t explore_episodes, const OdeOptions& options = {});

/// Stiff problems with several rates plus the non-stiff decay problem.
std::vector<OdeProblem> ode_training_family();

}  // namespace weaves::apps
