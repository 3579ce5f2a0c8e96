#include "weaves/tapestry.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "weaves/error.hpp"
#include "weaves/value.hpp"

namespace weaves {

std::string_view to_string(StringStatus s) {
  switch (s) {
    case StringStatus::Ready: return "ready";
    case StringStatus::Running: return "running";
    case StringStatus::Blocked: return "blocked";
    case StringStatus::Finished: return "finished";
    case StringStatus::Failed: return "failed";
    case StringStatus::Detached: return "detached";
  }
  return "?";
}

std::int64_t Frame::get_i64(std::string_view name, std::int64_t fallback) const {
  auto it = locals.find(name);
  return it == locals.end() ? fallback : value::to_i64(it->second);
}

double Frame::get_f64(std::string_view name, double fallback) const {
  auto it = locals.find(name);
  return it == locals.end() ? fallback : value::to_f64(it->second);
}

std::vector<double> Frame::get_f64s(std::string_view name) const {
  auto it = locals.find(name);
  return it == locals.end() ? std::vector<double>{} : value::to_f64s(it->second);
}

void Frame::set_i64(std::string_view name, std::int64_t v) { locals[std::string(name)] = value::from_i64(v); }
void Frame::set_f64(std::string_view name, double v) { locals[std::string(name)] = value::from_f64(v); }
void Frame::set_f64s(std::string_view name, std::span<const double> v) {
  locals[std::string(name)] = value::from_f64s(v);
}

const EntryPoint* ModuleRecord::entry(std::string_view name) const {
  for (const auto& e : def.entries)
    if (e.name == name) return &e;
  return nullptr;
}

FunctionHandle ModuleRecord::function(std::string_view name) const {
  for (const auto& f : functions)
    if (f->name == name) return f;
  return nullptr;
}

std::optional<CellId> BeadRecord::cell(std::string_view symbol) const {
  for (const auto& [name, id] : context)
    if (name == symbol) return id;
  return std::nullopt;
}

namespace {
bool valid_identifier(std::string_view s) {
  return !s.empty() && std::none_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}
}  // namespace

void Tapestry::validate(const ModuleDef& def) {
  if (!valid_identifier(def.name)) throw Error(ErrorCode::InvalidDefinition, "module name must be non-empty without spaces");
  if (def.entries.empty() && def.functions.empty())
    throw Error(ErrorCode::InvalidDefinition, "module '" + def.name + "' has no entry points or functions");
  std::set<std::string_view> seen;
  for (const auto& g : def.globals) {
    if (!valid_identifier(g.name))
      throw Error(ErrorCode::InvalidDefinition, "module '" + def.name + "': bad global name '" + g.name + "'");
    if (!seen.insert(g.name).second)
      throw Error(ErrorCode::InvalidDefinition, "module '" + def.name + "': duplicate global '" + g.name + "'");
  }
  seen.clear();
  for (const auto& e : def.entries) {
    if (!valid_identifier(e.name) || !e.program)
      throw Error(ErrorCode::InvalidDefinition, "module '" + def.name + "': bad entry '" + e.name + "'");
    if (!seen.insert(e.name).second)
      throw Error(ErrorCode::InvalidDefinition, "module '" + def.name + "': duplicate entry '" + e.name + "'");
  }
  seen.clear();
  for (const auto& f : def.functions) {
    if (!valid_identifier(f.name) || !f.fn)
      throw Error(ErrorCode::InvalidDefinition, "module '" + def.name + "': bad function '" + f.name + "'");
    if (!seen.insert(f.name).second)
      throw Error(ErrorCode::InvalidDefinition, "module '" + def.name + "': duplicate function '" + f.name + "'");
  }
}

ModuleId Tapestry::add_module(ModuleDef def) {
  validate(def);
  if (module_names_.count(def.name)) throw Error(ErrorCode::DuplicateModule, def.name);
  ModuleId id{static_cast<std::uint32_t>(modules_.size())};
  ModuleRecord rec{id, std::move(def), {}};
  for (const auto& f : rec.def.functions)
    rec.functions.push_back(std::make_shared<const FunctionImpl>(FunctionImpl{rec.def.name, f.name, f.signature, f.fn}));
  module_names_.emplace(rec.def.name, id);
  modules_.push_back(std::move(rec));
  return id;
}

const ModuleRecord& Tapestry::module(ModuleId id) const {
  if (id.index() >= modules_.size()) throw Error(ErrorCode::UnknownModule, "module id " + std::to_string(id.value));
  return modules_[id.index()];
}

std::optional<ModuleId> Tapestry::find_module(std::string_view name) const {
  auto it = module_names_.find(name);
  if (it == module_names_.end()) return std::nullopt;
  return it->second;
}

BeadId Tapestry::add_bead(ModuleId module, std::string label, std::vector<std::pair<std::string, CellId>> context) {
  BeadId id{static_cast<std::uint32_t>(beads_.size())};
  if (label.empty()) label = "b" + std::to_string(id.value);
  beads_.push_back(BeadRecord{id, module, std::move(label), std::move(context), true});
  return id;
}

const BeadRecord& Tapestry::bead(BeadId id) const {
  if (id.index() >= beads_.size() || !beads_[id.index()].live)
    throw Error(ErrorCode::UnknownBead, "bead " + std::to_string(id.value));
  return beads_[id.index()];
}

BeadRecord& Tapestry::bead_mut(BeadId id) {
  (void)bead(id);
  return beads_[id.index()];
}

std::optional<BeadId> Tapestry::find_bead(std::string_view label) const {
  for (const auto& b : beads_)
    if (b.live && b.label == label) return b.id;
  return std::nullopt;
}

WeaveId Tapestry::add_weave(std::vector<BeadId> beads, std::string label) {
  WeaveId id{static_cast<std::uint32_t>(weaves_.size())};
  if (label.empty()) label = "w" + std::to_string(id.value);
  weaves_.push_back(WeaveRecord{id, std::move(label), std::move(beads), true});
  return id;
}

const WeaveRecord& Tapestry::weave(WeaveId id) const {
  if (id.index() >= weaves_.size() || !weaves_[id.index()].live)
    throw Error(ErrorCode::UnknownWeave, "weave " + std::to_string(id.value));
  return weaves_[id.index()];
}

WeaveRecord& Tapestry::weave_mut(WeaveId id) {
  (void)weave(id);
  return weaves_[id.index()];
}

std::optional<WeaveId> Tapestry::find_weave(std::string_view label) const {
  for (const auto& w : weaves_)
    if (w.live && w.label == label) return w.id;
  return std::nullopt;
}

StringRecord& Tapestry::add_string(StringRecord record) {
  record.id = StringId{static_cast<std::uint32_t>(strings_.size())};
  strings_.push_back(std::move(record));
  return strings_.back();
}

const StringRecord& Tapestry::string(StringId id) const {
  if (id.index() >= strings_.size()) throw Error(ErrorCode::UnknownString, "string " + std::to_string(id.value));
  return strings_[id.index()];
}

StringRecord& Tapestry::string_mut(StringId id) {
  (void)string(id);
  return strings_[id.index()];
}

std::pair<ModuleId, const EntryPoint*> Tapestry::find_entry(WeaveId weave_id, std::string_view entry) const {
  const auto& w = weave(weave_id);
  for (auto it = w.beads.rbegin(); it != w.beads.rend(); ++it) {
    const auto& m = module(bead(*it).module);
    if (const auto* e = m.entry(entry)) return {m.id, e};
  }
  throw Error(ErrorCode::UnknownEntry, "no entry '" + std::string(entry) + "' in weave " + w.label);
}

}  // namespace weaves
