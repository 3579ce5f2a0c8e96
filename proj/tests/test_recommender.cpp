#include <doctest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "weaves/error.hpp"
#include "weaves/mining.hpp"
#include "weaves/recommender.hpp"
#include "weaves/staged.hpp"

using namespace weaves;

namespace {

const FeatureState kS{{"s", "0"}};
const std::vector<Action> kAB = {{ActionKind::ChooseModule, "a1"}, {ActionKind::ChooseModule, "a2"}};

QPolicy greedy() {
  QPolicy p;
  p.set_epsilon(0.0);
  return p;
}

}  // namespace

TEST_CASE("select: argmax, tie-break, scale invariance") {
  QPolicy p = greedy();
  CHECK(p.select(kS, kAB).name == "a1");
  p.set_q(kS, kAB[0], 2.0);
  p.set_q(kS, kAB[1], 5.0);
  CHECK(p.select(kS, kAB).name == "a2");
  p.set_q(kS, kAB[0], 20.0);
  p.set_q(kS, kAB[1], 50.0);
  CHECK(p.select(kS, kAB).name == "a2");
  CHECK_THROWS_AS(p.select(kS, std::vector<Action>{}), Error);
}

TEST_CASE("select: epsilon 1 is uniform within 3 sigma") {
  QConfig cfg;
  cfg.seed = 7;
  QPolicy p(cfg);
  p.set_epsilon(1.0);
  std::vector<Action> legal;
  for (int i = 0; i < 4; ++i) legal.push_back({ActionKind::ChooseModule, "a" + std::to_string(i)});
  p.set_q(kS, legal[2], 100.0);
  std::map<std::string, int> counts;
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++counts[p.select(kS, legal).name];
  double mean = n / 4.0, sigma = std::sqrt(n * 0.25 * 0.75);
  for (const auto& a : legal) CHECK(std::abs(counts[a.name] - mean) < 3 * sigma);
}

TEST_CASE("update: one step, zero rate, terminal") {
  QConfig cfg;
  cfg.alpha = 1.0;
  cfg.gamma = 0.0;
  QPolicy p(cfg);
  p.update(kS, kAB[0], 3.0, nullptr, {});
  CHECK(p.q(kS, kAB[0]) == 3.0);
  cfg.alpha = 0.0;
  QPolicy q(cfg);
  q.set_q(kS, kAB[0], 1.5);
  q.update(kS, kAB[0], 10.0, &kS, kAB);
  CHECK(q.q(kS, kAB[0]) == 1.5);
}

TEST_CASE("Q-learning converges to the Bellman fixed point of the toy MDP") {
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
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) CHECK(std::abs(p.q(oracle::toy_state(s), actions[a]) - fixed[s][a]) < 1e-6);
}

TEST_CASE("modes set epsilon") {
  QPolicy p;
  p.set_mode(PolicyMode::Explore);
  CHECK(p.epsilon() == 0.5);
  p.set_mode(PolicyMode::Exploit);
  CHECK(p.epsilon() == 0.05);
}

TEST_CASE("pruning dominates argmax and empties to NoLegalAction") {
  QPolicy p = greedy();
  p.set_q(kS, kAB[0], 9.0);
  p.prune(kS, kAB[0]);
  CHECK(p.select(kS, kAB).name == "a2");
  p.set_epsilon(1.0);
  for (int i = 0; i < 200; ++i) CHECK(p.select(kS, kAB).name == "a2");
  p.prune(kS, kAB[1]);
  try {
    p.select(kS, kAB);
    FAIL("expected NoLegalAction");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoLegalAction);
  }
  p.begin_episode();
  CHECK_NOTHROW(p.select(kS, kAB));
}

TEST_CASE("prune_failed_path augments the state with the tuple values") {
  QPolicy p = greedy();
  TupleView v;
  v.state = kS;
  v.failed = kAB[0];
  v.values = {{"err", 0.5}};
  FeatureState aug = p.prune_failed_path(v);
  CHECK(aug.get("s"));
  CHECK(aug.features().size() > kS.features().size());
  CHECK(p.pruned(kS, kAB[0]));
  CHECK(p.pruned(aug, kAB[0]));
  CHECK(p.select(aug, kAB).name == "a2");
}

TEST_CASE("rule extraction: margins and clause format") {
  QPolicy p;
  FeatureState s1{{"state", "near-stiff"}, {"algorithm", "non-stiff"}};
  FeatureState s2{{"state", "non-stiff"}, {"algorithm", "non-stiff"}};
  FeatureState s3{{"state", "stiff"}, {"algorithm", "stiff"}};
  Action stay{ActionKind::SwitchAlgorithm, "stay"}, sw{ActionKind::SwitchAlgorithm, "switch-to-stiff"};
  p.set_q(s1, stay, -1.0);
  p.set_q(s1, sw, 1.0);
  p.set_q(s2, stay, 1.0);
  p.set_q(s2, sw, -1.0);
  p.set_q(s3, stay, 0.5);
  p.set_q(s3, sw, 0.45);
  auto rules = p.extract_rules();
  CHECK(rules.size() == 2);
  std::string text = format_rules(rules);
  CHECK(text.find("state(near-stiff), algorithm(non-stiff)") != std::string::npos);
  CHECK(text.find("action(switch-to-stiff)") != std::string::npos);
  CHECK(text.find("qvalue(") != std::string::npos);
}

TEST_CASE("policy json round trip") {
  QPolicy p;
  p.set_q(kS, kAB[1], 0.25);
  QPolicy back = QPolicy::from_json(p.to_json());
  CHECK(back.q(kS, kAB[1]) == 0.25);
  CHECK(back.table() == p.table());
}

TEST_CASE("staged composition: single candidates, guards, ordering") {
  StageGraph g;
  g.stages.push_back({"a", {}, {{"m1", nullptr, nullptr}}});
  g.stages.push_back({"b", {"a"}, {{"m2", nullptr, nullptr}}});
  QPolicy p = greedy();
  CHECK(staged_compose({}, g, p).modules() == std::vector<std::string>{"m1", "m2"});
  g.stages[1].candidates[0].guard = [](const FeatureState&) { return false; };
  try {
    staged_compose({}, g, p);
    FAIL("expected NoFeasibleComposition");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoFeasibleComposition);
  }
  StageGraph cyc;
  cyc.stages.push_back({"a", {"b"}, {{"m", nullptr, nullptr}}});
  cyc.stages.push_back({"b", {"a"}, {{"m", nullptr, nullptr}}});
  CHECK_THROWS_AS(stage_order(cyc), Error);
}

TEST_CASE("staged composition: trained policy finds the cheapest pipeline") {
  auto g = toy_pde_pipeline();
  for (std::string kind : {"stiff", "smooth", "advection"}) {
    FeatureState problem{{"problem", kind}};
    auto all = enumerate_compositions(problem, g);
    REQUIRE_FALSE(all.empty());
    double best = 1e300;
    for (const auto& c : all) best = std::min(best, toy_pipeline_cost(problem, c));
    QConfig cfg;
    cfg.seed = 3;
    QPolicy p(cfg);
    p.set_epsilon(1.0);
    for (int ep = 0; ep < 3000; ++ep) {
      auto c = staged_compose(problem, g, p);
      reinforce(p, c, -toy_pipeline_cost(problem, c));
    }
    p.set_epsilon(0.0);
    auto chosen = staged_compose(problem, g, p);
    CHECK(toy_pipeline_cost(problem, chosen) == doctest::Approx(best));
    if (kind == "advection")
      for (const auto& m : chosen.modules()) CHECK(m != "cg");
  }
}

TEST_CASE("mining: everywhere, strictness, monotonicity") {
  PerformanceDb db({"alpha", "lfill"});
  for (double a : {0.1, 0.2, 0.3})
    for (double l : {0.0, 0.5, 1.0})
      for (int r = 0; r < 5; ++r) {
        db.append({{a, l}, "A", true, 1.0, 0});
        db.append({{a, l}, "B", true, 2.0, 0});
      }
  auto all = mine_regions(db, "A", "B", 1.0);
  CHECK(all.cells.size() == 9);
  CHECK(all.boxes.size() == 1);
  db.append({{0.2, 0.5}, "A", true, 5.0, 0});
  db.append({{0.2, 0.5}, "B", true, 2.0, 0});
  auto strict = mine_regions(db, "A", "B", 1.0);
  CHECK(strict.cells.size() == 8);
  CHECK_FALSE(strict.cells.count(GridCell{1, 1}));
  CHECK(mine_regions(db, "A", "B", 0.8).cells.size() == 9);
  for (const auto& b : strict.boxes)
    for (const auto& c : strict.boxes)
      if (&b != &c)
        for (const auto& cell : strict.cells) CHECK_FALSE((b.contains(cell) && c.contains(cell)));
  PerformanceDb empty({"alpha"});
  CHECK_THROWS_AS(mine_regions(empty, "A", "B", 0.9), Error);
}

TEST_CASE("mining: banded region recovered, raising confidence never enlarges it") {
  auto truth = oracle::banded_region_truth();
  auto db = oracle::banded_region_database(truth, 11);
  auto region = mine_regions(db, "A", "B", 0.9);
  auto score = oracle::score_region(region, truth);
  CHECK(score.coverage >= 0.9);
  CHECK(score.false_inclusion <= 0.1);
  auto stricter = mine_regions(db, "A", "B", 0.95);
  for (const auto& c : stricter.cells) CHECK(region.cells.count(c));
  auto csv = db.to_csv();
  CHECK(PerformanceDb::from_csv(csv).records().size() == db.records().size());
}
