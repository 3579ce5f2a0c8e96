#pragma once

#include <cstdint>
#include <deque>
#include <initializer_list>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "weaves/checkpoint.hpp"
#include "weaves/ids.hpp"
#include "weaves/locks.hpp"
#include "weaves/memory.hpp"
#include "weaves/module.hpp"
#include "weaves/namespace_engine.hpp"
#include "weaves/scheduler.hpp"
#include "weaves/tapestry.hpp"

namespace weaves {

class Runtime;

/// Transport endpoint a runtime's strings use for send/receive.
class MessagePort {
 public:
  virtual ~MessagePort() = default;
  virtual void send(std::uint32_t channel, Bytes payload) = 0;
  virtual std::optional<Bytes> try_recv(std::uint32_t channel) = 0;
};

// Reconfiguration commands. Names refer to module names and bead / weave
// labels so that they can be scripted.
namespace command {
struct AddBead {
  std::string module;
  std::string label;
};
struct AddWeave {
  std::vector<std::string> beads;
  std::string label;
};
struct SpawnString {
  std::string weave;
  std::string entry;
};
struct Rebind {
  std::string weave;
  std::string function;
  std::string module;       // module providing the replacement
  std::string replacement;  // function name inside that module
};
struct InsertModule {
  ModuleDef def;
};
struct ShareTuple {
  std::vector<std::string> symbols;
  std::vector<std::string> beads;
};
}  // namespace command

using Command = std::variant<command::AddBead, command::AddWeave, command::SpawnString, command::Rebind,
                             command::InsertModule, command::ShareTuple>;

std::string_view command_name(const Command& c);

/// Handle a running string uses to reach its namespace, its code bindings,
/// locks, tracked memory and the transport.
class StringContext {
 public:
  StringId id() const { return id_; }
  WeaveId weave() const;
  Runtime& runtime() { return rt_; }
  Frame& frame();

  CellId resolve(std::string_view symbol) const;
  const Bytes& read(std::string_view symbol) const;
  void write(std::string_view symbol, Bytes value);
  std::int64_t read_i64(std::string_view symbol) const;
  double read_f64(std::string_view symbol) const;
  std::vector<double> read_f64s(std::string_view symbol) const;
  void write_i64(std::string_view symbol, std::int64_t v);
  void write_f64(std::string_view symbol, double v);
  void write_f64s(std::string_view symbol, std::span<const double> v);

  /// Calls an exported function through the weave's binding. The call
  /// enters the binding's bead and leaves it on return.
  std::vector<double> call(std::string_view function, std::span<const double> args);
  std::vector<double> call(std::string_view function, std::initializer_list<double> args = {}) {
    return call(function, std::span<const double>(args.begin(), args.size()));
  }

  /// Explicit bead traversal that may span several steps.
  void enter(BeadId bead);
  void exit();
  BeadId current_bead() const;
  std::uint32_t shared_depth() const;

  /// Acquire at the start of a step, before any other mutation; on false the
  /// step must return Blocked and will be re-run once the lock is granted.
  bool acquire(LockId lock);
  bool acquire(std::string_view lock);
  void release(LockId lock);
  void release(std::string_view lock);

  Address alloc(std::uint64_t size);
  void free(Address a);
  const Bytes& read_at(Address a) const;
  void write_at(Address a, Bytes value);
  void write_at(Address a, std::size_t offset, std::span<const std::uint8_t> bytes);

  void send(std::uint32_t channel, Bytes payload);
  std::optional<Bytes> try_recv(std::uint32_t channel);

  /// Queues a reconfiguration command for the next dispatch boundary.
  void submit(Command c);

 private:
  friend class Runtime;
  StringContext(Runtime& rt, StringId id) : rt_(rt), id_(id) {}

  Runtime& rt_;
  StringId id_;
};

struct RuntimeConfig {
  SchedulerConfig scheduler;
  NodeRegion region = NodeRegion(NodeId{0}, 0, std::uint64_t{1} << 40);
  /// Mode of the checkpoint attached to each lock acquisition.
  CheckpointMode lock_checkpoint_mode = CheckpointMode::Cow;
};

enum class RunOutcome {
  Finished,   // no live strings remain
  Idle,       // live strings exist, all waiting on messages
  StepLimit,  // stopped at a dispatch boundary after the step budget
};

struct RunResult {
  RunOutcome outcome = RunOutcome::Finished;
  std::uint64_t steps = 0;
};

/// One tapestry executor: the structural registry, its cells, namespaces,
/// checkpoints, locks and the cooperative scheduler that runs its strings.
class Runtime {
 public:
  explicit Runtime(RuntimeConfig config = {});
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  // Construction (control path only).
  ModuleId register_module(ModuleDef def);
  /// Same as register_module but permitted while strings are live.
  ModuleId insert_module_runtime(ModuleDef def);
  BeadId instantiate_bead(ModuleId module, std::string label = {});
  BeadId instantiate_bead(std::string_view module, std::string label = {});
  WeaveId define_weave(std::vector<BeadId> beads, std::string label = {});
  void share_tuple(const TupleSpaceDecl& decl);
  StringId spawn_string(WeaveId weave, std::string_view entry);
  void rebind_function(WeaveId weave, std::string_view name, FunctionHandle impl);
  void rebind_function(WeaveId weave, std::string_view name, std::string_view module, std::string_view replacement);

  /// Applies one command now, atomically. Throws on error.
  void apply(const Command& c);
  /// Queues a command for the next dispatch boundary. Errors are recorded
  /// in command_errors() and leave the tapestry unchanged.
  void submit(Command c) { commands_.push_back(std::move(c)); }
  const std::vector<std::string>& command_errors() const { return command_errors_; }

  // Control-path access to a weave's namespace.
  const Bytes& read(WeaveId weave, std::string_view symbol) const;
  void write(WeaveId weave, std::string_view symbol, Bytes value);
  std::int64_t read_i64(WeaveId weave, std::string_view symbol) const;
  double read_f64(WeaveId weave, std::string_view symbol) const;
  std::vector<double> read_f64s(WeaveId weave, std::string_view symbol) const;

  // Execution.
  RunResult run(std::uint64_t max_steps = std::numeric_limits<std::uint64_t>::max());
  /// Runs a single dispatch; false when nothing was runnable.
  bool dispatch_once();
  /// Marks strings waiting on messages runnable again.
  void wake_waiting();

  CheckpointId take_checkpoint(CheckpointScope scope, CheckpointMode mode);
  void restore(CheckpointId id);

  // State.
  Tapestry& tapestry() { return tapestry_; }
  const Tapestry& tapestry() const { return tapestry_; }
  Memory& memory() { return memory_; }
  const Memory& memory() const { return memory_; }
  NamespaceEngine& names() { return names_; }
  const NamespaceEngine& names() const { return names_; }
  CheckpointManager& checkpoints() { return checkpoints_; }
  const CheckpointManager& checkpoints() const { return checkpoints_; }
  LockTable& locks() { return locks_; }
  const LockTable& locks() const { return locks_; }
  const EquivalenceClasses& classes();
  const SchedulerConfig& scheduler_config() const { return config_.scheduler; }
  void set_quantum(std::uint32_t q);

  const std::vector<TraceEvent>& trace() const { return trace_; }
  void clear_trace() { trace_.clear(); }
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

  std::uint64_t total_steps() const { return step_; }
  std::uint64_t dispatches() const { return dispatches_; }
  std::uint64_t recoveries() const { return recoveries_; }
  /// Highest number of strings simultaneously inside one shared bead.
  std::uint32_t max_shared_occupancy() const { return max_occupancy_; }

  void set_port(MessagePort* port) { port_ = port; }
  MessagePort* port() const { return port_; }

  bool in_step() const { return current_.valid(); }
  bool any_started() const;

  /// Rebuilds derived scheduler state after bulk changes (image load,
  /// migration).
  void invalidate();

 private:
  friend class StringContext;

  void require_control_path(std::string_view what) const;
  void emit(std::string event, StringId s, std::string reason);
  void drain_commands();
  std::optional<StringId> pick();
  std::optional<StringId> candidate_in(std::uint32_t klass) const;
  bool runnable(const StringRecord& s) const;
  void execute(StringId s, std::string reason);
  void finish(StringRecord& s, StringStatus status);
  bool recover_deadlock();
  void release_lock(StringId s, LockId lock);
  void enter_bead(StringId s, BeadId bead);
  void exit_bead(StringId s);
  std::uint32_t class_of(StringId s);

  RuntimeConfig config_;
  Tapestry tapestry_;
  Memory memory_;
  NamespaceEngine names_;
  CheckpointManager checkpoints_;
  LockTable locks_;

  EquivalenceClasses classes_;
  bool classes_dirty_ = true;
  std::mt19937_64 rng_;
  StringId last_class_first_;              // first member of the last dispatched class
  StringId last_string_;
  std::vector<std::uint64_t> last_dispatch_;  // per string: dispatch ordinal of its last run
  std::vector<StringId> pinned_;              // per class: member currently inside a shared bead

  StringId current_;
  bool continuation_pending_ = false;
  bool block_pending_ = false;
  std::vector<std::uint32_t> occupancy_;  // strings inside each bead
  std::uint32_t max_occupancy_ = 0;

  std::deque<Command> commands_;
  std::vector<std::string> command_errors_;
  std::vector<TraceEvent> trace_;
  std::vector<std::string> diagnostics_;
  MessagePort* port_ = nullptr;

  std::uint64_t step_ = 0;
  std::uint64_t dispatches_ = 0;
  std::uint64_t recoveries_ = 0;
};

}  // namespace weaves
