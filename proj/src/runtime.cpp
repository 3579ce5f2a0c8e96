#include "weaves/runtime.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "weaves/error.hpp"
#include "weaves/value.hpp"

namespace weaves {

std::string_view command_name(const Command& c) {
  static constexpr std::string_view names[] = {"add_bead", "add_weave", "spawn_string", "rebind", "insert_module",
                                               "share_tuple"};
  return names[c.index()];
}

// ---------------------------------------------------------------- context

WeaveId StringContext::weave() const { return rt_.tapestry_.string(id_).weave; }
Frame& StringContext::frame() { return rt_.tapestry_.string_mut(id_).state.frame; }

CellId StringContext::resolve(std::string_view symbol) const { return rt_.names_.active()->resolve(symbol); }
const Bytes& StringContext::read(std::string_view symbol) const { return rt_.memory_.read(resolve(symbol)); }
void StringContext::write(std::string_view symbol, Bytes value) {
  rt_.memory_.write(resolve(symbol), std::move(value), id_);
}
std::int64_t StringContext::read_i64(std::string_view symbol) const { return value::to_i64(read(symbol)); }
double StringContext::read_f64(std::string_view symbol) const { return value::to_f64(read(symbol)); }
std::vector<double> StringContext::read_f64s(std::string_view symbol) const { return value::to_f64s(read(symbol)); }
void StringContext::write_i64(std::string_view symbol, std::int64_t v) { write(symbol, value::from_i64(v)); }
void StringContext::write_f64(std::string_view symbol, double v) { write(symbol, value::from_f64(v)); }
void StringContext::write_f64s(std::string_view symbol, std::span<const double> v) {
  write(symbol, value::from_f64s(v));
}

std::vector<double> StringContext::call(std::string_view function, std::span<const double> args) {
  // Copy the binding: a rebind during the call must not affect it.
  FunctionBinding binding = rt_.names_.active()->function(function);
  rt_.enter_bead(id_, binding.bead);
  std::vector<double> out;
  try {
    out = binding.impl->fn(*this, args);
  } catch (...) {
    rt_.exit_bead(id_);
    throw;
  }
  rt_.exit_bead(id_);
  return out;
}

void StringContext::enter(BeadId bead) {
  (void)rt_.tapestry_.bead(bead);
  rt_.enter_bead(id_, bead);
}

void StringContext::exit() {
  if (rt_.tapestry_.string(id_).state.bead_stack.empty())
    throw Error(ErrorCode::InvalidArgument, "exit without a matching enter");
  rt_.exit_bead(id_);
}

BeadId StringContext::current_bead() const {
  const auto& s = rt_.tapestry_.string(id_);
  return s.state.bead_stack.empty() ? s.entry_bead : s.state.bead_stack.back().bead;
}

std::uint32_t StringContext::shared_depth() const { return rt_.tapestry_.string(id_).state.shared_depth; }

bool StringContext::acquire(LockId lock) {
  const LockRecord& l = rt_.locks_.lock(lock);
  if (l.holder == id_) return true;
  bool queued = std::find(l.waiters.begin(), l.waiters.end(), id_) != l.waiters.end();
  if (!queued) {
    CheckpointId cp = rt_.checkpoints_.take(CheckpointScope::of(id_), rt_.config_.lock_checkpoint_mode);
    rt_.locks_.history().push_back(Acquisition{id_, current_bead(), lock, cp});
  }
  if (rt_.locks_.request(id_, lock)) return true;
  auto& s = rt_.tapestry_.string_mut(id_);
  s.state.blocked_on = lock;
  rt_.block_pending_ = true;
  return false;
}

bool StringContext::acquire(std::string_view lock) { return acquire(rt_.locks_.ensure(lock)); }

void StringContext::release(LockId lock) { rt_.release_lock(id_, lock); }

void StringContext::release(std::string_view lock) {
  auto id = rt_.locks_.find(lock);
  if (!id) throw Error(ErrorCode::UnknownLock, std::string(lock));
  release(*id);
}

Address StringContext::alloc(std::uint64_t size) { return rt_.memory_.track_alloc(current_bead(), size, id_); }
void StringContext::free(Address a) { rt_.memory_.track_free(a, id_); }
const Bytes& StringContext::read_at(Address a) const { return rt_.memory_.read(rt_.memory_.cell_at(a)); }
void StringContext::write_at(Address a, Bytes value) { rt_.memory_.write(rt_.memory_.cell_at(a), std::move(value), id_); }
void StringContext::write_at(Address a, std::size_t offset, std::span<const std::uint8_t> bytes) {
  rt_.memory_.write_range(rt_.memory_.cell_at(a), offset, bytes, id_);
}

void StringContext::send(std::uint32_t channel, Bytes payload) {
  if (!rt_.port_) throw Error(ErrorCode::UnknownChannel, "no transport attached");
  rt_.port_->send(channel, std::move(payload));
}

std::optional<Bytes> StringContext::try_recv(std::uint32_t channel) {
  if (!rt_.port_) throw Error(ErrorCode::UnknownChannel, "no transport attached");
  return rt_.port_->try_recv(channel);
}

void StringContext::submit(Command c) { rt_.submit(std::move(c)); }

// ---------------------------------------------------------------- runtime

Runtime::Runtime(RuntimeConfig config)
    : config_(std::move(config)),
      memory_(config_.region),
      checkpoints_(memory_, tapestry_),
      rng_(config_.scheduler.seed) {
  if (config_.scheduler.quantum == 0) throw Error(ErrorCode::InvalidArgument, "quantum must be at least 1");
  memory_.set_observer(&checkpoints_);
  checkpoints_.set_extension([this] { return locks_.serialize(); },
                             [this](const Bytes& b) { locks_.load(b); });
  checkpoints_.set_after_restore([this](const Checkpoint&) { invalidate(); });
}

void Runtime::require_control_path(std::string_view what) const {
  if (in_step()) throw Error(ErrorCode::ScopeMidStep, std::string(what) + " is not allowed inside a string step");
}

void Runtime::set_quantum(std::uint32_t q) {
  if (q == 0) throw Error(ErrorCode::InvalidArgument, "quantum must be at least 1");
  config_.scheduler.quantum = q;
}

bool Runtime::any_started() const {
  return std::any_of(tapestry_.strings().begin(), tapestry_.strings().end(),
                     [](const StringRecord& s) { return s.steps > 0 || s.state.status != StringStatus::Ready; });
}

ModuleId Runtime::register_module(ModuleDef def) {
  require_control_path("register_module");
  return tapestry_.add_module(std::move(def));
}

ModuleId Runtime::insert_module_runtime(ModuleDef def) {
  require_control_path("insert_module_runtime");
  ModuleId id = tapestry_.add_module(std::move(def));
  emit("insert", StringId{}, tapestry_.module(id).def.name);
  return id;
}

BeadId Runtime::instantiate_bead(ModuleId module, std::string label) {
  require_control_path("instantiate_bead");
  const auto& m = tapestry_.module(module);
  if (!label.empty() && tapestry_.find_bead(label))
    throw Error(ErrorCode::InvalidDefinition, "bead label '" + label + "' already in use");
  BeadId next{static_cast<std::uint32_t>(tapestry_.beads().size())};
  std::vector<std::pair<std::string, CellId>> context;
  context.reserve(m.def.globals.size());
  for (const auto& g : m.def.globals) context.emplace_back(g.name, memory_.create_cell(next, g.initial));
  BeadId id = tapestry_.add_bead(module, std::move(label), std::move(context));
  occupancy_.resize(tapestry_.beads().size(), 0);
  return id;
}

BeadId Runtime::instantiate_bead(std::string_view module, std::string label) {
  auto id = tapestry_.find_module(module);
  if (!id) throw Error(ErrorCode::UnknownModule, std::string(module));
  return instantiate_bead(*id, std::move(label));
}

WeaveId Runtime::define_weave(std::vector<BeadId> beads, std::string label) {
  require_control_path("define_weave");
  if (beads.empty()) throw Error(ErrorCode::EmptyWeave, "a weave needs at least one bead");
  std::set<BeadId> seen;
  for (BeadId b : beads) {
    (void)tapestry_.bead(b);
    if (!seen.insert(b).second)
      throw Error(ErrorCode::InvalidDefinition, "bead " + std::to_string(b.value) + " listed twice in weave");
  }
  if (!label.empty() && tapestry_.find_weave(label))
    throw Error(ErrorCode::InvalidDefinition, "weave label '" + label + "' already in use");
  WeaveId id = tapestry_.add_weave(std::move(beads), std::move(label));
  names_.build(tapestry_, id, &diagnostics_);
  classes_dirty_ = true;
  return id;
}

void Runtime::share_tuple(const TupleSpaceDecl& decl) {
  require_control_path("share_tuple");
  if (any_started()) throw Error(ErrorCode::LateSharing, "tuple spaces must be declared before strings run");
  if (decl.symbols.empty() || decl.beads.empty())
    throw Error(ErrorCode::InvalidDefinition, "tuple declaration needs symbols and beads");
  for (BeadId b : decl.beads) {
    const auto& bead = tapestry_.bead(b);
    for (const auto& sym : decl.symbols)
      if (!bead.cell(sym))
        throw Error(ErrorCode::UnknownSymbol, "bead " + bead.label + " does not declare '" + sym + "'");
  }
  // Every bead holding a replaced cell is redirected, so overlapping
  // declarations merge transitively.
  std::map<CellId, CellId> replaced;
  for (const auto& sym : decl.symbols) {
    CellId merged = *tapestry_.bead(decl.beads.front()).cell(sym);
    for (std::size_t i = 1; i < decl.beads.size(); ++i) {
      CellId cell = *tapestry_.bead(decl.beads[i]).cell(sym);
      if (cell != merged) replaced.emplace(cell, merged);
    }
  }
  std::set<BeadId> touched;
  for (const auto& b : tapestry_.beads()) {
    for (auto& [name, cell] : tapestry_.bead_mut(b.id).context) {
      auto it = replaced.find(cell);
      if (it == replaced.end()) continue;
      cell = it->second;
      touched.insert(b.id);
    }
  }
  for (const auto& [cell, merged] : replaced) memory_.evict(cell);
  for (const auto& w : tapestry_.weaves()) {
    if (!w.live) continue;
    if (std::any_of(w.beads.begin(), w.beads.end(), [&](BeadId b) { return touched.count(b) > 0; }))
      names_.build(tapestry_, w.id, &diagnostics_);
  }
  tapestry_.tuple_decls().push_back(decl);
}

StringId Runtime::spawn_string(WeaveId weave, std::string_view entry) {
  require_control_path("spawn_string");
  const auto& w = tapestry_.weave(weave);
  auto [module, ep] = tapestry_.find_entry(weave, entry);
  StringRecord rec;
  rec.weave = weave;
  rec.entry = std::string(entry);
  rec.entry_module = module;
  for (auto it = w.beads.rbegin(); it != w.beads.rend(); ++it) {
    if (tapestry_.bead(*it).module == module) {
      rec.entry_bead = *it;
      break;
    }
  }
  rec.program = ep->program;
  const auto& table = names_.table(weave);
  rec.context_frame.reserve(table.size());
  for (const auto& [symbol, cell] : table.entries()) rec.context_frame.emplace_back(cell, memory_.read(cell));
  std::sort(rec.context_frame.begin(), rec.context_frame.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  StringId id = tapestry_.add_string(std::move(rec)).id;
  last_dispatch_.resize(tapestry_.strings().size(), 0);
  classes_dirty_ = true;
  emit("spawn", id, std::string(entry));
  return id;
}

void Runtime::rebind_function(WeaveId weave, std::string_view name, FunctionHandle impl) {
  require_control_path("rebind_function");
  names_.rebind(weave, name, std::move(impl));
  emit("rebind", StringId{}, tapestry_.weave(weave).label + ":" + std::string(name));
}

void Runtime::rebind_function(WeaveId weave, std::string_view name, std::string_view module,
                              std::string_view replacement) {
  auto m = tapestry_.find_module(module);
  if (!m) throw Error(ErrorCode::UnknownModule, std::string(module));
  FunctionHandle impl = tapestry_.module(*m).function(replacement);
  if (!impl)
    throw Error(ErrorCode::UnknownFunction, "module '" + std::string(module) + "' exports no '" +
                                                std::string(replacement) + "'");
  rebind_function(weave, name, std::move(impl));
}

namespace {
template <class... F>
struct Overloaded : F... {
  using F::operator()...;
};
template <class... F>
Overloaded(F...) -> Overloaded<F...>;
}  // namespace

void Runtime::apply(const Command& c) {
  auto bead_of = [&](const std::string& label) {
    auto b = tapestry_.find_bead(label);
    if (!b) throw Error(ErrorCode::UnknownBead, "no bead labelled '" + label + "'");
    return *b;
  };
  auto weave_of = [&](const std::string& label) {
    auto w = tapestry_.find_weave(label);
    if (!w) throw Error(ErrorCode::UnknownWeave, "no weave labelled '" + label + "'");
    return *w;
  };
  std::visit(Overloaded{
                 [&](const command::AddBead& a) { instantiate_bead(a.module, a.label); },
                 [&](const command::AddWeave& a) {
                   std::vector<BeadId> beads;
                   for (const auto& l : a.beads) beads.push_back(bead_of(l));
                   define_weave(std::move(beads), a.label);
                 },
                 [&](const command::SpawnString& a) { spawn_string(weave_of(a.weave), a.entry); },
                 [&](const command::Rebind& a) {
                   rebind_function(weave_of(a.weave), a.function, a.module, a.replacement);
                 },
                 [&](const command::InsertModule& a) { insert_module_runtime(a.def); },
                 [&](const command::ShareTuple& a) {
                   TupleSpaceDecl decl;
                   decl.symbols = a.symbols;
                   for (const auto& l : a.beads) decl.beads.push_back(bead_of(l));
                   share_tuple(decl);
                 },
             },
             c);
}

void Runtime::drain_commands() {
  while (!commands_.empty()) {
    Command c = std::move(commands_.front());
    commands_.pop_front();
    try {
      apply(c);
      emit("command", StringId{}, std::string(command_name(c)));
    } catch (const Error& e) {
      command_errors_.push_back(std::string(command_name(c)) + ": " + e.what());
      emit("command-error", StringId{}, std::string(command_name(c)));
    }
  }
}

const Bytes& Runtime::read(WeaveId weave, std::string_view symbol) const {
  return memory_.read(names_.table(weave).resolve(symbol));
}
void Runtime::write(WeaveId weave, std::string_view symbol, Bytes value) {
  memory_.write(names_.table(weave).resolve(symbol), std::move(value));
}
std::int64_t Runtime::read_i64(WeaveId weave, std::string_view symbol) const {
  return value::to_i64(read(weave, symbol));
}
double Runtime::read_f64(WeaveId weave, std::string_view symbol) const { return value::to_f64(read(weave, symbol)); }
std::vector<double> Runtime::read_f64s(WeaveId weave, std::string_view symbol) const {
  return value::to_f64s(read(weave, symbol));
}

// ---------------------------------------------------------------- scheduling

void Runtime::emit(std::string event, StringId s, std::string reason) {
  if (!config_.scheduler.record_trace) return;
  std::uint32_t k = EquivalenceClasses::kNone;
  if (s.valid()) k = classes_.of(s);  // the class the string was last scheduled in
  trace_.push_back(TraceEvent{step_, std::move(event), s, k, std::move(reason)});
}

const EquivalenceClasses& Runtime::classes() {
  if (classes_dirty_) {
    classes_ = compute_equivalence_classes(tapestry_);
    classes_dirty_ = false;
    pinned_.assign(classes_.classes.size(), StringId{});
    for (const auto& s : tapestry_.strings()) {
      if (!s.live() || s.state.shared_depth == 0) continue;
      auto& pin = pinned_[classes_.of(s.id)];
      if (!pin.valid()) pin = s.id;
    }
  }
  return classes_;
}

std::uint32_t Runtime::class_of(StringId s) { return classes().of(s); }

void Runtime::invalidate() {
  classes_dirty_ = true;
  occupancy_.assign(tapestry_.beads().size(), 0);
  last_dispatch_.resize(tapestry_.strings().size(), 0);
  for (const auto& s : tapestry_.strings()) {
    if (!s.live()) continue;
    for (const auto& f : s.state.bead_stack) ++occupancy_[f.bead.index()];
  }
}

bool Runtime::runnable(const StringRecord& s) const { return s.state.status == StringStatus::Ready; }

std::optional<StringId> Runtime::candidate_in(std::uint32_t klass) const {
  StringId pin = pinned_[klass];
  if (pin.valid()) {
    // Intra-class switching is off while a member is inside a shared bead.
    if (runnable(tapestry_.string(pin))) return pin;
    return std::nullopt;
  }
  std::optional<StringId> best;
  for (StringId s : classes_.classes[klass]) {
    if (!runnable(tapestry_.string(s))) continue;
    if (!best || last_dispatch_[s.index()] < last_dispatch_[best->index()]) best = s;
  }
  return best;
}

std::optional<StringId> Runtime::pick() {
  const auto& cls = classes();
  const std::size_t n = cls.classes.size();
  if (n == 0) return std::nullopt;
  if (config_.scheduler.policy == SchedulingPolicy::SeededRandom) {
    std::vector<StringId> options;
    for (std::uint32_t k = 0; k < n; ++k)
      if (auto c = candidate_in(k)) options.push_back(*c);
    if (options.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> d(0, options.size() - 1);
    return options[d(rng_)];
  }
  // Rotate to the class after the one dispatched last.
  std::size_t start = 0;
  if (last_class_first_.valid()) {
    auto it = std::upper_bound(cls.classes.begin(), cls.classes.end(), last_class_first_,
                               [](StringId v, const std::vector<StringId>& c) { return v < c.front(); });
    start = static_cast<std::size_t>(it - cls.classes.begin()) % n;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t k = static_cast<std::uint32_t>((start + i) % n);
    if (auto c = candidate_in(k)) return c;
  }
  return std::nullopt;
}

void Runtime::enter_bead(StringId s, BeadId bead) {
  bool shared = classes().shared(bead);
  auto& st = tapestry_.string_mut(s).state;
  st.bead_stack.push_back(BeadFrame{bead, shared});
  if (bead.index() >= occupancy_.size()) occupancy_.resize(bead.index() + 1, 0);
  std::uint32_t inside = ++occupancy_[bead.index()];
  if (shared) {
    ++st.shared_depth;
    max_occupancy_ = std::max(max_occupancy_, inside);
  }
}

void Runtime::exit_bead(StringId s) {
  auto& st = tapestry_.string_mut(s).state;
  BeadFrame f = st.bead_stack.back();
  st.bead_stack.pop_back();
  --occupancy_[f.bead.index()];
  if (f.shared) {
    --st.shared_depth;
    if (st.shared_depth == 0) continuation_pending_ = true;
  }
}

void Runtime::release_lock(StringId s, LockId lock) {
  StringId next = locks_.release(s, lock);
  auto& hist = locks_.history();
  for (auto it = hist.rbegin(); it != hist.rend(); ++it) {
    if (it->string == s && it->lock == lock) {
      if (checkpoints_.is_live(it->checkpoint)) checkpoints_.discard(it->checkpoint);
      break;
    }
  }
  if (next.valid()) {
    auto& w = tapestry_.string_mut(next);
    if (w.state.status == StringStatus::Blocked) w.state.status = StringStatus::Ready;
    w.state.blocked_on = LockId{};
    emit("wake", next, locks_.lock(lock).name);
  }
}

void Runtime::finish(StringRecord& s, StringStatus status) {
  s.state.status = status;
  while (!s.state.bead_stack.empty()) exit_bead(s.id);
  continuation_pending_ = false;
  for (const auto& l : locks_.locks()) {
    if (l.holder == s.id) release_lock(s.id, l.id);
  }
  for (const auto& l : locks_.locks()) locks_.withdraw(s.id, l.id);
  s.state.blocked_on = LockId{};
  for (const auto& a : locks_.history())
    if (a.string == s.id && checkpoints_.is_live(a.checkpoint)) checkpoints_.discard(a.checkpoint);
  classes_dirty_ = true;
}

void Runtime::execute(StringId id, std::string reason) {
  std::uint32_t klass = classes_.of(id);
  auto& s = tapestry_.string_mut(id);
  names_.activate(&names_.table(s.weave));
  s.state.status = StringStatus::Running;
  current_ = id;
  ++dispatches_;
  last_dispatch_[id.index()] = dispatches_;
  last_class_first_ = classes_.classes[klass].front();
  last_string_ = id;
  emit("dispatch", id, std::move(reason));

  StringContext ctx(*this, id);
  std::uint32_t budget = config_.scheduler.quantum;
  std::string event;
  std::string why;
  for (;;) {
    continuation_pending_ = false;
    block_pending_ = false;
    StepStatus st;
    try {
      st = s.program(ctx);
    } catch (const std::exception& e) {
      ++step_;
      ++s.steps;
      diagnostics_.push_back("string " + std::to_string(id.value) + " failed: " + e.what());
      finish(s, StringStatus::Failed);
      emit("fail", id, "exception");
      current_ = StringId{};
      throw;
    }
    ++step_;
    ++s.steps;
    if (block_pending_) st = StepStatus::Blocked;
    if (st == StepStatus::Continue) {
      if (continuation_pending_) {
        event = "continuation";
        why = "shared-exit";
        break;
      }
      if (--budget == 0) {
        event = "preempt";
        why = s.state.shared_depth > 0 ? "quantum-pinned" : "quantum";
        break;
      }
      continue;
    }
    switch (st) {
      case StepStatus::Yield:
        event = continuation_pending_ ? "continuation" : "yield";
        why = continuation_pending_ ? "shared-exit" : "program";
        break;
      case StepStatus::Blocked:
        s.state.status = StringStatus::Blocked;
        event = "block";
        why = s.state.blocked_on.valid() ? locks_.lock(s.state.blocked_on).name : "message";
        break;
      case StepStatus::Finished:
        finish(s, StringStatus::Finished);
        event = "finish";
        why = "done";
        break;
      case StepStatus::Failed:
        diagnostics_.push_back("string " + std::to_string(id.value) + " reported failure");
        finish(s, StringStatus::Failed);
        event = "fail";
        why = "program";
        break;
      case StepStatus::Continue: break;
    }
    break;
  }
  if (s.state.status == StringStatus::Running) s.state.status = StringStatus::Ready;
  if (!classes_dirty_ && klass < pinned_.size()) {
    if (s.state.shared_depth > 0)
      pinned_[klass] = id;
    else if (pinned_[klass] == id)
      pinned_[klass] = StringId{};
  }
  current_ = StringId{};
  emit(std::move(event), id, std::move(why));
}

bool Runtime::dispatch_once() {
  require_control_path("dispatch");
  drain_commands();
  StringId previous = last_string_;
  std::uint32_t previous_class = previous.valid() ? classes().of(previous) : EquivalenceClasses::kNone;
  auto next = pick();
  if (!next) return false;
  std::string reason;
  std::uint32_t k = classes_.of(*next);
  if (pinned_[k] == *next)
    reason = "pinned";
  else if (*next == previous)
    reason = "resume";
  else if (k == previous_class)
    reason = "intra-class";
  else
    reason = "inter-class";
  execute(*next, std::move(reason));
  return true;
}

void Runtime::wake_waiting() {
  for (auto& s : tapestry_.strings_mut())
    if (s.state.status == StringStatus::Blocked && !s.state.blocked_on.valid()) s.state.status = StringStatus::Ready;
}

bool Runtime::recover_deadlock() {
  auto edges = build_wait_graph(locks_);
  auto cycle = detect_deadlock(edges);
  if (!cycle) return false;
  StringId victim = cycle->front().waiter;
  LockId held = cycle->back().lock;  // the predecessor waits on this lock, which the victim holds
  std::ostringstream desc;
  for (const auto& e : *cycle) desc << 's' << e.waiter << '>' << locks_.lock(e.lock).name << '>';
  desc << 's' << victim;
  emit("deadlock", victim, desc.str());

  auto& hist = locks_.history();
  std::size_t at = hist.size();
  for (std::size_t i = hist.size(); i-- > 0;) {
    if (hist[i].string == victim && hist[i].lock == held) {
      at = i;
      break;
    }
  }
  if (at == hist.size() || !checkpoints_.is_live(hist[at].checkpoint))
    throw Error(ErrorCode::MissingCheckpoint, "no acquisition checkpoint for string " + std::to_string(victim.value));

  auto& v = tapestry_.string_mut(victim);
  if (v.state.blocked_on.valid()) locks_.withdraw(victim, v.state.blocked_on);
  checkpoints_.restore(hist[at].checkpoint);
  for (std::size_t i = hist.size(); i-- > at;) {
    if (hist[i].string != victim) continue;
    if (locks_.lock(hist[i].lock).holder == victim) release_lock(victim, hist[i].lock);
    if (checkpoints_.is_live(hist[i].checkpoint)) checkpoints_.discard(hist[i].checkpoint);
  }
  v.state.status = StringStatus::Ready;
  v.state.blocked_on = LockId{};
  ++recoveries_;
  emit("rollback", victim, locks_.lock(held).name);
  return true;
}

RunResult Runtime::run(std::uint64_t max_steps) {
  require_control_path("run");
  const std::uint64_t start = step_;
  for (;;) {
    if (step_ - start >= max_steps) return {RunOutcome::StepLimit, step_ - start};
    if (dispatch_once()) continue;
    bool live = false;
    bool waiting = false;
    for (const auto& s : tapestry_.strings()) {
      if (!s.live()) continue;
      live = true;
      if (s.state.status == StringStatus::Blocked && !s.state.blocked_on.valid()) waiting = true;
    }
    if (!live) return {RunOutcome::Finished, step_ - start};
    if (recover_deadlock()) continue;
    if (waiting) return {RunOutcome::Idle, step_ - start};
    emit("all-blocked", StringId{}, "unrecoverable");
    throw Error(ErrorCode::AllBlocked, "every live string is blocked and no single-cycle recovery applies");
  }
}

CheckpointId Runtime::take_checkpoint(CheckpointScope scope, CheckpointMode mode) {
  require_control_path("take_checkpoint");
  return checkpoints_.take(scope, mode);
}

void Runtime::restore(CheckpointId id) {
  require_control_path("restore");
  checkpoints_.restore(id);
}

}  // namespace weaves
