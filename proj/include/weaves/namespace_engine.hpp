#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "weaves/ids.hpp"
#include "weaves/module.hpp"
#include "weaves/tapestry.hpp"

namespace weaves {

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

struct FunctionBinding {
  FunctionHandle impl;
  BeadId bead;  // bead whose code context the call traverses
};

/// Per-weave indirection table: symbol -> cell handle, plus the weave's
/// function bindings folded into the same object.
class ContextTable {
 public:
  explicit ContextTable(WeaveId weave) : weave_(weave) {}

  WeaveId weave() const { return weave_; }

  /// Throws UnknownSymbol.
  CellId resolve(std::string_view symbol) const;
  const CellId* find(std::string_view symbol) const;
  /// Throws UnknownFunction.
  const FunctionBinding& function(std::string_view name) const;
  const FunctionBinding* find_function(std::string_view name) const;

  std::size_t size() const { return entries_.size(); }
  const auto& entries() const { return entries_; }
  const auto& functions() const { return functions_; }

 private:
  friend class NamespaceEngine;

  WeaveId weave_;
  std::unordered_map<std::string, CellId, StringHash, std::equal_to<>> entries_;
  std::unordered_map<std::string, FunctionBinding, StringHash, std::equal_to<>> functions_;
};

class NamespaceEngine {
 public:
  /// (Re)builds the table of `weave` from its beads' data contexts. Later
  /// beads shadow earlier ones; each shadowing is reported in `diagnostics`.
  const ContextTable& build(const Tapestry& tapestry, WeaveId weave, std::vector<std::string>* diagnostics = nullptr);

  /// Throws UnknownWeave.
  const ContextTable& table(WeaveId weave) const;
  bool has_table(WeaveId weave) const;

  /// Swaps the active table; returns the previous one. Constant time.
  const ContextTable* activate(const ContextTable* table) noexcept {
    const ContextTable* previous = active_;
    active_ = table;
    return previous;
  }
  const ContextTable* active() const noexcept { return active_; }

  /// Replaces one function binding of one weave. Throws UnknownWeave,
  /// UnknownFunction, SignatureMismatch.
  void rebind(WeaveId weave, std::string_view name, FunctionHandle impl);

  /// Drops a weave's table (weave migrated away).
  void drop(WeaveId weave);

 private:
  std::vector<std::unique_ptr<ContextTable>> tables_;
  std::vector<std::map<std::string, FunctionHandle, std::less<>>> overrides_;
  const ContextTable* active_ = nullptr;
};

}  // namespace weaves
