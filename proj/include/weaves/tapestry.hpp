#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "weaves/ids.hpp"
#include "weaves/module.hpp"

namespace weaves {

enum class StringStatus : std::uint8_t { Ready, Running, Blocked, Finished, Failed, Detached };

std::string_view to_string(StringStatus s);

struct ModuleRecord {
  ModuleId id;
  ModuleDef def;
  std::vector<FunctionHandle> functions;  // one per def.functions entry, shared by all beads

  const EntryPoint* entry(std::string_view name) const;
  FunctionHandle function(std::string_view name) const;
};

/// A module instantiation: its own data context, the module's code context.
struct BeadRecord {
  BeadId id;
  ModuleId module;
  std::string label;
  std::vector<std::pair<std::string, CellId>> context;  // declaration order
  bool live = true;

  std::optional<CellId> cell(std::string_view symbol) const;
};

struct WeaveRecord {
  WeaveId id;
  std::string label;
  std::vector<BeadId> beads;  // later beads shadow earlier ones on name collisions
  bool live = true;
};

struct BeadFrame {
  BeadId bead;
  bool shared = false;  // counted in shared_bead_depth when entered

  friend bool operator==(const BeadFrame&, const BeadFrame&) = default;
};

/// Everything needed to resume a string exactly where it was.
struct Resumption {
  StringStatus status = StringStatus::Ready;
  Frame frame;
  std::uint32_t shared_depth = 0;
  std::vector<BeadFrame> bead_stack;
  LockId blocked_on;

  friend bool operator==(const Resumption&, const Resumption&) = default;
};

struct StringRecord {
  StringId id;
  WeaveId weave;
  std::string entry;
  ModuleId entry_module;
  BeadId entry_bead;  // last bead of the weave whose module defines the entry
  Program program;
  Resumption state;
  /// Copy of the weave's global values taken when the string was created.
  std::vector<std::pair<CellId, Bytes>> context_frame;
  std::uint64_t steps = 0;

  bool live() const {
    return state.status != StringStatus::Finished && state.status != StringStatus::Failed &&
           state.status != StringStatus::Detached;
  }
};

struct TupleSpaceDecl {
  std::vector<std::string> symbols;
  std::vector<BeadId> beads;
};

/// Structural registry of a composed application. Owns no cell values; the
/// Runtime pairs it with a Memory and a NamespaceEngine.
class Tapestry {
 public:
  /// Validates and stores a module. Throws DuplicateModule, InvalidDefinition.
  ModuleId add_module(ModuleDef def);

  const ModuleRecord& module(ModuleId id) const;
  std::optional<ModuleId> find_module(std::string_view name) const;
  const std::vector<ModuleRecord>& modules() const { return modules_; }

  BeadId add_bead(ModuleId module, std::string label, std::vector<std::pair<std::string, CellId>> context);
  const BeadRecord& bead(BeadId id) const;
  BeadRecord& bead_mut(BeadId id);
  std::optional<BeadId> find_bead(std::string_view label) const;
  const std::vector<BeadRecord>& beads() const { return beads_; }

  WeaveId add_weave(std::vector<BeadId> beads, std::string label);
  const WeaveRecord& weave(WeaveId id) const;
  WeaveRecord& weave_mut(WeaveId id);
  std::optional<WeaveId> find_weave(std::string_view label) const;
  const std::vector<WeaveRecord>& weaves() const { return weaves_; }

  StringRecord& add_string(StringRecord record);
  const StringRecord& string(StringId id) const;
  StringRecord& string_mut(StringId id);
  const std::vector<StringRecord>& strings() const { return strings_; }
  std::vector<StringRecord>& strings_mut() { return strings_; }

  /// Resolves an entry point among the weave's beads (last listed bead wins).
  /// Throws UnknownEntry.
  std::pair<ModuleId, const EntryPoint*> find_entry(WeaveId weave, std::string_view entry) const;

  std::vector<TupleSpaceDecl>& tuple_decls() { return tuple_decls_; }
  const std::vector<TupleSpaceDecl>& tuple_decls() const { return tuple_decls_; }

  /// Validation shared by add_module and runtime insertion.
  static void validate(const ModuleDef& def);

 private:
  std::vector<ModuleRecord> modules_;
  std::map<std::string, ModuleId, std::less<>> module_names_;
  std::vector<BeadRecord> beads_;
  std::vector<WeaveRecord> weaves_;
  std::vector<StringRecord> strings_;
  std::vector<TupleSpaceDecl> tuple_decls_;
};

}  // namespace weaves
