#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace weaves {

/// Discretized features in schema order, e.g. {state=near-stiff,
/// algorithm=non-stiff}. Two states are equal iff their keys are equal.
class FeatureState {
 public:
  FeatureState() = default;
  FeatureState(std::initializer_list<std::pair<std::string, std::string>> f) : features_(f) {}

  void set(std::string_view name, std::string value);
  const std::string* get(std::string_view name) const;
  const std::vector<std::pair<std::string, std::string>>& features() const { return features_; }

  /// `name=value` pairs joined by '|'.
  std::string key() const;
  static FeatureState from_key(std::string_view key);

  friend bool operator==(const FeatureState& a, const FeatureState& b) { return a.features_ == b.features_; }

 private:
  std::vector<std::pair<std::string, std::string>> features_;
};

enum class ActionKind : std::uint8_t { ChooseModule, SwitchAlgorithm, SetParameter, TerminateStage };

std::string_view to_string(ActionKind k);

struct Action {
  ActionKind kind = ActionKind::ChooseModule;
  std::string name;  // identity of the action, e.g. "switch-to-stiff"

  friend bool operator==(const Action& a, const Action& b) { return a.name == b.name; }
};

enum class PolicyMode : std::uint8_t { Explore, Exploit };

struct QConfig {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon_explore = 0.5;
  double epsilon_exploit = 0.05;
  double rule_margin = 0.1;
  std::uint64_t seed = 1;
};

/// What a rollback exposes about the abandoned future.
struct TupleView {
  FeatureState state;
  Action failed;
  std::vector<std::string> history;                      // invocation history up to the failure
  std::vector<std::pair<std::string, double>> values;    // intermediate tuple values
};

struct PolicyRule {
  FeatureState state;
  Action action;
  double utility = 0.0;
  double margin = 0.0;
};

/// Tabular Q-learning policy with epsilon-greedy selection and per-episode
/// pruning of failed (state, action) pairs.
class QPolicy {
 public:
  explicit QPolicy(QConfig config = {});

  double q(const FeatureState& s, const Action& a) const;
  void set_q(const FeatureState& s, const Action& a, double value);

  /// Epsilon-greedy over the non-pruned legal actions; argmax ties go to
  /// the lowest position in `legal`. Throws NoLegalAction.
  Action select(const FeatureState& s, std::span<const Action> legal);
  /// Greedy choice regardless of epsilon (still honours pruning).
  Action best(const FeatureState& s, std::span<const Action> legal) const;

  /// Q(s,a) += alpha (r + gamma max_a' Q(s',a') - Q(s,a)); `next` empty
  /// means terminal.
  void update(const FeatureState& s, const Action& a, double reward, const FeatureState* next,
              std::span<const Action> next_legal);

  void set_mode(PolicyMode m);
  PolicyMode mode() const { return mode_; }
  double epsilon() const { return epsilon_; }
  void set_epsilon(double e);
  const QConfig& config() const { return config_; }

  void prune(const FeatureState& s, const Action& a);
  bool pruned(const FeatureState& s, const Action& a) const;
  /// Clears pruning at the start of a new episode.
  void begin_episode() { pruned_.clear(); }

  /// Prunes the failed pair and returns the state augmented with the
  /// binned tuple values; the failed action is pruned in both.
  FeatureState prune_failed_path(const TupleView& view);

  /// One rule per state whose best utility beats the runner-up by more
  /// than `margin` (defaults to the configured rule margin).
  std::vector<PolicyRule> extract_rules(std::optional<double> margin = std::nullopt) const;

  std::size_t size() const;
  const std::map<std::string, std::map<std::string, double>>& table() const { return table_; }

  std::string to_json() const;
  static QPolicy from_json(std::string_view text);
  void save(const std::string& path) const;
  static QPolicy load(const std::string& path);

 private:
  QConfig config_;
  PolicyMode mode_ = PolicyMode::Explore;
  double epsilon_;
  std::mt19937_64 rng_;
  std::map<std::string, std::map<std::string, double>> table_;  // state key -> action -> utility
  std::map<std::string, ActionKind> kinds_;
  std::set<std::pair<std::string, std::string>> pruned_;
};

/// Fig-7 style clause text:
///   qvalue(1) :-
///     state(near-stiff), algorithm(non-stiff),
///     action(switch-to-stiff).
std::string format_rule(const PolicyRule& r);
std::string format_rules(std::span<const PolicyRule> rules);

/// Maps a continuous value into `bin<i>` given ascending edges.
std::string bin_value(double v, std::span<const double> edges);

}  // namespace weaves
