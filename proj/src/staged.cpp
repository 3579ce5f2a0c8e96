#include "weaves/staged.hpp"

#include <algorithm>
#include <map>

#include "weaves/error.hpp"

namespace weaves {

std::vector<std::string> Composition::modules() const {
  std::vector<std::string> out;
  for (const auto& d : decisions) out.push_back(d.module);
  return out;
}

std::vector<std::size_t> stage_order(const StageGraph& graph) {
  const std::size_t n = graph.stages.size();
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < n; ++i)
    if (!index.emplace(graph.stages[i].name, i).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate stage '" + graph.stages[i].name + "'");
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& p : graph.stages[i].after) {
      auto it = index.find(p);
      if (it == index.end()) throw Error(ErrorCode::InvalidArgument, "unknown predecessor stage '" + p + "'");
      next[it->second].push_back(i);
      ++indegree[i];
    }
  }
  std::vector<std::size_t> order;
  std::vector<bool> done(n, false);
  while (order.size() < n) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!done[i] && indegree[i] == 0) {
        pick = i;
        break;
      }
    }
    if (pick == n) throw Error(ErrorCode::InvalidArgument, "stage graph has a cycle");
    done[pick] = true;
    order.push_back(pick);
    for (std::size_t j : next[pick]) --indegree[j];
  }
  return order;
}

namespace {
std::vector<const StageCandidate*> feasible(const Stage& stage, const FeatureState& f) {
  std::vector<const StageCandidate*> out;
  for (const auto& c : stage.candidates)
    if (!c.guard || c.guard(f)) out.push_back(&c);
  return out;
}

FeatureState view_for(const Stage& stage, const FeatureState& f) {
  FeatureState s = f;
  s.set("stage", stage.name);
  return s;
}
}  // namespace

Composition staged_compose(const FeatureState& problem, const StageGraph& graph, QPolicy& policy) {
  Composition c;
  c.features = problem;
  for (std::size_t i : stage_order(graph)) {
    const Stage& stage = graph.stages[i];
    auto options = feasible(stage, c.features);
    if (options.empty())
      throw Error(ErrorCode::NoFeasibleComposition, "no candidate of stage '" + stage.name + "' passes its guard");
    StageDecision d;
    d.stage = stage.name;
    d.state = view_for(stage, c.features);
    for (const auto* o : options) d.legal.push_back(Action{ActionKind::ChooseModule, o->module});
    Action a = policy.select(d.state, d.legal);
    d.module = a.name;
    auto chosen = std::find_if(options.begin(), options.end(), [&](const StageCandidate* o) { return o->module == a.name; });
    if ((*chosen)->produces) (*chosen)->produces(c.features);
    c.features.set("chose." + stage.name, a.name);
    c.decisions.push_back(std::move(d));
  }
  return c;
}

std::vector<Composition> enumerate_compositions(const FeatureState& problem, const StageGraph& graph) {
  auto order = stage_order(graph);
  std::vector<Composition> out;
  std::function<void(std::size_t, Composition)> rec = [&](std::size_t k, Composition c) {
    if (k == order.size()) {
      out.push_back(std::move(c));
      return;
    }
    const Stage& stage = graph.stages[order[k]];
    auto options = feasible(stage, c.features);
    for (const auto* o : options) {
      Composition next = c;
      StageDecision d;
      d.stage = stage.name;
      d.state = view_for(stage, c.features);
      for (const auto* x : options) d.legal.push_back(Action{ActionKind::ChooseModule, x->module});
      d.module = o->module;
      if (o->produces) o->produces(next.features);
      next.features.set("chose." + stage.name, o->module);
      next.decisions.push_back(std::move(d));
      rec(k + 1, std::move(next));
    }
  };
  Composition start;
  start.features = problem;
  rec(0, std::move(start));
  return out;
}

void reinforce(QPolicy& policy, const Composition& c, double reward) {
  for (std::size_t i = 0; i < c.decisions.size(); ++i) {
    const auto& d = c.decisions[i];
    bool last = i + 1 == c.decisions.size();
    const FeatureState* next = last ? nullptr : &c.decisions[i + 1].state;
    std::span<const Action> next_legal;
    if (!last) next_legal = c.decisions[i + 1].legal;
    policy.update(d.state, Action{ActionKind::ChooseModule, d.module}, last ? reward : 0.0, next, next_legal);
  }
}

StageGraph toy_pde_pipeline() {
  StageGraph g;
  auto stiff = [](const FeatureState& f) {
    const std::string* s = f.get("problem");
    return s && *s == "stiff";
  };
  g.stages.push_back(Stage{
      "discretizer",
      {},
      {StageCandidate{"fd2", nullptr, [](FeatureState& f) { f.set("conditioning", "good"); }},
       StageCandidate{"fd4", nullptr, [stiff](FeatureState& f) {
                        f.set("conditioning", stiff(f) ? "ill" : "good");
                      }}}});
  g.stages.push_back(Stage{"preconditioner",
                           {"discretizer"},
                           {StageCandidate{"none", nullptr, nullptr}, StageCandidate{"jacobi", nullptr, nullptr},
                            StageCandidate{"ilu", nullptr, nullptr}}});
  // CG needs a self-adjoint operator: the upwinded advection problem is not.
  auto self_adjoint = [](const FeatureState& f) {
    const std::string* s = f.get("problem");
    return !s || *s != "advection";
  };
  g.stages.push_back(Stage{"solver",
                           {"preconditioner"},
                           {StageCandidate{"cg", self_adjoint, nullptr}, StageCandidate{"gmres", nullptr, nullptr}}});
  return g;
}

double toy_pipeline_cost(const FeatureState& problem, const Composition& c) {
  auto mods = c.modules();
  const std::string& disc = mods.at(0);
  const std::string& pre = mods.at(1);
  const std::string& sol = mods.at(2);
  const std::string* kind = problem.get("problem");
  bool stiff = kind && *kind == "stiff";
  // Accuracy requirement: the fourth-order discretizer is needed for stiff
  // problems, otherwise the second-order one must refine and pays extra.
  double cost = disc == "fd2" ? (stiff ? 6.0 : 1.0) : 2.0;
  bool ill = stiff && disc == "fd4";
  double iterations = ill ? 40.0 : 6.0;
  if (pre == "jacobi") iterations = ill ? 12.0 : 5.0;
  if (pre == "ilu") iterations = ill ? 4.0 : 4.0;
  double setup = pre == "none" ? 0.0 : (pre == "jacobi" ? 0.5 : 2.0);
  double per_iteration = sol == "cg" ? 0.1 : 0.15;
  return cost + setup + iterations * per_iteration;
}

}  // namespace weaves
