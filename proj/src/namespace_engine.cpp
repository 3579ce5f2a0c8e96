#include "weaves/namespace_engine.hpp"

#include "weaves/error.hpp"

namespace weaves {

CellId ContextTable::resolve(std::string_view symbol) const {
  auto it = entries_.find(symbol);
  if (it == entries_.end())
    throw Error(ErrorCode::UnknownSymbol, "'" + std::string(symbol) + "' in weave " + std::to_string(weave_.value));
  return it->second;
}

const CellId* ContextTable::find(std::string_view symbol) const {
  auto it = entries_.find(symbol);
  return it == entries_.end() ? nullptr : &it->second;
}

const FunctionBinding& ContextTable::function(std::string_view name) const {
  auto it = functions_.find(name);
  if (it == functions_.end())
    throw Error(ErrorCode::UnknownFunction, "'" + std::string(name) + "' in weave " + std::to_string(weave_.value));
  return it->second;
}

const FunctionBinding* ContextTable::find_function(std::string_view name) const {
  auto it = functions_.find(name);
  return it == functions_.end() ? nullptr : &it->second;
}

const ContextTable& NamespaceEngine::build(const Tapestry& tapestry, WeaveId weave, std::vector<std::string>* diagnostics) {
  const auto& w = tapestry.weave(weave);
  if (tables_.size() <= weave.index()) {
    tables_.resize(weave.index() + 1);
    overrides_.resize(weave.index() + 1);
  }
  auto fresh = std::make_unique<ContextTable>(weave);
  for (BeadId b : w.beads) {
    const auto& bead = tapestry.bead(b);
    for (const auto& [symbol, cell] : bead.context) {
      auto [it, inserted] = fresh->entries_.insert_or_assign(symbol, cell);
      if (!inserted && diagnostics)
        diagnostics->push_back("weave " + w.label + ": symbol '" + symbol + "' of bead " + bead.label +
                               " shadows an earlier bead");
    }
    const auto& module = tapestry.module(bead.module);
    for (const auto& fn : module.functions) {
      bool inserted = fresh->functions_.insert_or_assign(fn->name, FunctionBinding{fn, b}).second;
      if (!inserted && diagnostics)
        diagnostics->push_back("weave " + w.label + ": function '" + fn->name + "' of bead " + bead.label +
                               " shadows an earlier bead");
    }
  }
  for (const auto& [name, impl] : overrides_[weave.index()]) {
    auto it = fresh->functions_.find(name);
    if (it != fresh->functions_.end()) it->second.impl = impl;
  }
  // Keep the table object stable so an active pointer survives a rebuild.
  if (tables_[weave.index()]) {
    *tables_[weave.index()] = std::move(*fresh);
  } else {
    tables_[weave.index()] = std::move(fresh);
  }
  return *tables_[weave.index()];
}

const ContextTable& NamespaceEngine::table(WeaveId weave) const {
  if (!has_table(weave)) throw Error(ErrorCode::UnknownWeave, "no context table for weave " + std::to_string(weave.value));
  return *tables_[weave.index()];
}

bool NamespaceEngine::has_table(WeaveId weave) const {
  return weave.valid() && weave.index() < tables_.size() && tables_[weave.index()] != nullptr;
}

void NamespaceEngine::rebind(WeaveId weave, std::string_view name, FunctionHandle impl) {
  if (!has_table(weave)) throw Error(ErrorCode::UnknownWeave, "weave " + std::to_string(weave.value));
  auto& table = *tables_[weave.index()];
  auto it = table.functions_.find(name);
  if (it == table.functions_.end())
    throw Error(ErrorCode::UnknownFunction, "'" + std::string(name) + "' not bound in weave " + std::to_string(weave.value));
  if (!impl) throw Error(ErrorCode::UnknownFunction, "null implementation for '" + std::string(name) + "'");
  if (impl->signature != it->second.impl->signature)
    throw Error(ErrorCode::SignatureMismatch, "'" + std::string(name) + "' is " + it->second.impl->signature +
                                                  ", replacement is " + impl->signature);
  it->second.impl = impl;
  overrides_[weave.index()].insert_or_assign(std::string(name), std::move(impl));
}

void NamespaceEngine::drop(WeaveId weave) {
  if (!has_table(weave)) return;
  if (active_ == tables_[weave.index()].get()) active_ = nullptr;
  tables_[weave.index()].reset();
  overrides_[weave.index()].clear();
}

}  // namespace weaves
