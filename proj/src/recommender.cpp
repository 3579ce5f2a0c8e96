#include "weaves/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "weaves/error.hpp"

namespace weaves {

void FeatureState::set(std::string_view name, std::string value) {
  for (auto& [n, v] : features_) {
    if (n == name) {
      v = std::move(value);
      return;
    }
  }
  features_.emplace_back(std::string(name), std::move(value));
}

const std::string* FeatureState::get(std::string_view name) const {
  for (const auto& [n, v] : features_)
    if (n == name) return &v;
  return nullptr;
}

std::string FeatureState::key() const {
  std::string out;
  for (const auto& [n, v] : features_) {
    if (!out.empty()) out += '|';
    out += n;
    out += '=';
    out += v;
  }
  return out;
}

FeatureState FeatureState::from_key(std::string_view key) {
  FeatureState s;
  while (!key.empty()) {
    auto bar = key.find('|');
    auto part = key.substr(0, bar);
    auto eq = part.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::InvalidArgument, "bad state key '" + std::string(key) + "'");
    s.set(part.substr(0, eq), std::string(part.substr(eq + 1)));
    key = bar == std::string_view::npos ? std::string_view{} : key.substr(bar + 1);
  }
  return s;
}

std::string_view to_string(ActionKind k) {
  switch (k) {
    case ActionKind::ChooseModule: return "choose_module";
    case ActionKind::SwitchAlgorithm: return "switch_algorithm";
    case ActionKind::SetParameter: return "set_parameter";
    case ActionKind::TerminateStage: return "terminate_stage";
  }
  return "?";
}

namespace {
ActionKind parse_kind(std::string_view s) {
  for (auto k : {ActionKind::ChooseModule, ActionKind::SwitchAlgorithm, ActionKind::SetParameter,
                 ActionKind::TerminateStage})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::InvalidArgument, "unknown action kind '" + std::string(s) + "'");
}
}  // namespace

QPolicy::QPolicy(QConfig config) : config_(config), epsilon_(config.epsilon_explore), rng_(config.seed) {
  if (!(config_.epsilon_explore > config_.epsilon_exploit && config_.epsilon_exploit > 0.0))
    throw Error(ErrorCode::InvalidArgument, "need epsilon_explore > epsilon_exploit > 0");
}

double QPolicy::q(const FeatureState& s, const Action& a) const {
  auto it = table_.find(s.key());
  if (it == table_.end()) return 0.0;
  auto jt = it->second.find(a.name);
  return jt == it->second.end() ? 0.0 : jt->second;
}

void QPolicy::set_q(const FeatureState& s, const Action& a, double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::InvalidArgument, "utilities must be finite");
  table_[s.key()][a.name] = value;
  kinds_[a.name] = a.kind;
}

void QPolicy::set_mode(PolicyMode m) {
  mode_ = m;
  epsilon_ = m == PolicyMode::Explore ? config_.epsilon_explore : config_.epsilon_exploit;
}

void QPolicy::set_epsilon(double e) {
  if (!(e >= 0.0 && e <= 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in [0,1]");
  epsilon_ = e;
}

void QPolicy::prune(const FeatureState& s, const Action& a) { pruned_.emplace(s.key(), a.name); }

bool QPolicy::pruned(const FeatureState& s, const Action& a) const { return pruned_.count({s.key(), a.name}) > 0; }

Action QPolicy::best(const FeatureState& s, std::span<const Action> legal) const {
  std::optional<std::size_t> pick;
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < legal.size(); ++i) {
    if (pruned(s, legal[i])) continue;
    double v = q(s, legal[i]);
    if (!pick || v > top) {
      pick = i;
      top = v;
    }
  }
  if (!pick) throw Error(ErrorCode::NoLegalAction, "no legal action in state '" + s.key() + "'");
  return legal[*pick];
}

Action QPolicy::select(const FeatureState& s, std::span<const Action> legal) {
  if (epsilon_ > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng_) < epsilon_) {
      std::vector<std::size_t> allowed;
      for (std::size_t i = 0; i < legal.size(); ++i)
        if (!pruned(s, legal[i])) allowed.push_back(i);
      if (allowed.empty()) throw Error(ErrorCode::NoLegalAction, "no legal action in state '" + s.key() + "'");
      std::uniform_int_distribution<std::size_t> d(0, allowed.size() - 1);
      return legal[allowed[d(rng_)]];
    }
  }
  return best(s, legal);
}

void QPolicy::update(const FeatureState& s, const Action& a, double reward, const FeatureState* next,
                     std::span<const Action> next_legal) {
  if (!std::isfinite(reward)) throw Error(ErrorCode::InvalidArgument, "reward must be finite");
  double future = 0.0;
  if (next && !next_legal.empty()) {
    future = -std::numeric_limits<double>::infinity();
    for (const auto& b : next_legal) future = std::max(future, q(*next, b));
  }
  double& cell = table_[s.key()][a.name];
  kinds_[a.name] = a.kind;
  cell += config_.alpha * (reward + config_.gamma * future - cell);
}

FeatureState QPolicy::prune_failed_path(const TupleView& view) {
  prune(view.state, view.failed);
  FeatureState augmented = view.state;
  for (const auto& [name, v] : view.values) {
    std::string bin;
    if (!std::isfinite(v))
      bin = "nonfinite";
    else if (v == 0.0)
      bin = "zero";
    else
      bin = "e" + std::to_string(static_cast<int>(std::floor(std::log10(std::fabs(v)))));
    augmented.set("tuple." + name, bin);
  }
  prune(augmented, view.failed);
  return augmented;
}

std::vector<PolicyRule> QPolicy::extract_rules(std::optional<double> margin) const {
  const double tau = margin.value_or(config_.rule_margin);
  std::vector<PolicyRule> out;
  for (const auto& [key, actions] : table_) {
    if (actions.size() < 2) continue;
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [name, v] : actions) ranked.emplace_back(v, name);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    double gap = ranked[0].first - ranked[1].first;
    if (gap <= tau) continue;
    auto kind = kinds_.find(ranked[0].second);
    out.push_back(PolicyRule{FeatureState::from_key(key),
                             Action{kind == kinds_.end() ? ActionKind::ChooseModule : kind->second, ranked[0].second},
                             ranked[0].first, gap});
  }
  return out;
}

std::size_t QPolicy::size() const {
  std::size_t n = 0;
  for (const auto& [k, a] : table_) n += a.size();
  return n;
}

std::string QPolicy::to_json() const {
  nlohmann::json j;
  j["format"] = "weaves-policy";
  j["version"] = 1;
  j["alpha"] = config_.alpha;
  j["gamma"] = config_.gamma;
  j["epsilon_explore"] = config_.epsilon_explore;
  j["epsilon_exploit"] = config_.epsilon_exploit;
  j["rule_margin"] = config_.rule_margin;
  j["seed"] = config_.seed;
  j["mode"] = mode_ == PolicyMode::Explore ? "explore" : "exploit";
  j["epsilon"] = epsilon_;
  auto& rows = j["table"] = nlohmann::json::array();
  for (const auto& [key, actions] : table_) {
    for (const auto& [name, v] : actions) {
      auto kind = kinds_.find(name);
      rows.push_back({{"state", key},
                      {"action", name},
                      {"kind", to_string(kind == kinds_.end() ? ActionKind::ChooseModule : kind->second)},
                      {"q", v}});
    }
  }
  return j.dump(2);
}

QPolicy QPolicy::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptImage, std::string("policy store: ") + e.what());
  }
  if (j.value("format", "") != "weaves-policy" || j.value("version", 0) != 1)
    throw Error(ErrorCode::CorruptImage, "not a version 1 policy store");
  QConfig c;
  c.alpha = j.value("alpha", c.alpha);
  c.gamma = j.value("gamma", c.gamma);
  c.epsilon_explore = j.value("epsilon_explore", c.epsilon_explore);
  c.epsilon_exploit = j.value("epsilon_exploit", c.epsilon_exploit);
  c.rule_margin = j.value("rule_margin", c.rule_margin);
  c.seed = j.value("seed", c.seed);
  QPolicy p(c);
  p.set_mode(j.value("mode", "explore") == "exploit" ? PolicyMode::Exploit : PolicyMode::Explore);
  p.set_epsilon(j.value("epsilon", p.epsilon()));
  for (const auto& row : j.at("table")) {
    Action a{parse_kind(row.at("kind").get<std::string>()), row.at("action").get<std::string>()};
    p.set_q(FeatureState::from_key(row.at("state").get<std::string>()), a, row.at("q").get<double>());
  }
  return p;
}

void QPolicy::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write policy to '" + path + "'");
  out << to_json() << '\n';
}

QPolicy QPolicy::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read policy '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

std::string format_rule(const PolicyRule& r) {
  std::ostringstream os;
  os << "qvalue(1) :-\n  ";
  bool first = true;
  for (const auto& [name, value] : r.state.features()) {
    if (!first) os << ", ";
    os << name << '(' << value << ')';
    first = false;
  }
  os << ",\n  action(" << r.action.name << ").";
  return os.str();
}

std::string format_rules(std::span<const PolicyRule> rules) {
  std::string out;
  for (const auto& r : rules) {
    if (!out.empty()) out += "\n\n";
    out += format_rule(r);
  }
  return out;
}

std::string bin_value(double v, std::span<const double> edges) {
  std::size_t i = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
  return "bin" + std::to_string(i);
}

}  // namespace weaves
