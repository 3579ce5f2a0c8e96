#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "weaves/recommender.hpp"

namespace weaves {

/// One module a stage may activate. `guard` sees the features produced so
/// far; `produces` adds the features this choice makes available to later
/// stages (e.g. a discretizer reporting the conditioning of its matrix).
struct StageCandidate {
  std::string module;
  std::function<bool(const FeatureState&)> guard;
  std::function<void(FeatureState&)> produces;
};

struct Stage {
  std::string name;
  std::vector<std::string> after;  // stages that must precede this one
  std::vector<StageCandidate> candidates;
};

struct StageGraph {
  std::vector<Stage> stages;
};

struct StageDecision {
  std::string stage;
  FeatureState state;  // what the policy saw
  std::string module;
  std::vector<Action> legal;
};

struct Composition {
  std::vector<StageDecision> decisions;
  FeatureState features;  // problem features, everything produced, and chose.<stage> per decision

  std::vector<std::string> modules() const;
};

/// Stage order: topological, ties broken by declaration order. Throws
/// InvalidArgument on cycles or unknown predecessors.
std::vector<std::size_t> stage_order(const StageGraph& graph);

/// Picks one module per stage in order, consulting `policy` on the
/// guard-filtered candidates. Throws NoFeasibleComposition.
Composition staged_compose(const FeatureState& problem, const StageGraph& graph, QPolicy& policy);

/// Every guard-respecting composition, for exhaustive comparison.
std::vector<Composition> enumerate_compositions(const FeatureState& problem, const StageGraph& graph);

/// Backs up a terminal reward through the decisions of one composition.
void reinforce(QPolicy& policy, const Composition& c, double reward);

/// Toy discretize -> precondition -> solve pipeline. The fine discretizer
/// reports ill-conditioning on stiff problems; a preconditioner then pays
/// for itself, otherwise it is overhead.
StageGraph toy_pde_pipeline();
/// Cost of running a composition on a problem (lower is better).
double toy_pipeline_cost(const FeatureState& problem, const Composition& c);

}  // namespace weaves
