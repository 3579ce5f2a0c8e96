#include "weaves/islands.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "weaves/error.hpp"
#include "weaves/runtime.hpp"
#include "weaves/value.hpp"

namespace weaves {

namespace {

struct Edge {
  BeadId a;
  BeadId b;
  std::string via;
};

std::string hex(Address a) {
  std::ostringstream os;
  os << "0x" << std::hex << a;
  return os.str();
}

std::vector<Edge> bead_edges(const Runtime& rt) {
  const Tapestry& t = rt.tapestry();
  const Memory& mem = rt.memory();
  std::vector<Edge> edges;
  for (const auto& w : t.weaves()) {
    if (!w.live) continue;
    for (std::size_t i = 1; i < w.beads.size(); ++i)
      edges.push_back(Edge{w.beads[0], w.beads[i], "weave " + w.label});
  }
  auto scan = [&](BeadId owner, CellId id) {
    const Cell& c = mem.cell(id);
    if (!c.live) return;
    for (std::size_t off = 0; off + 8 <= c.value.size(); off += 8) {
      Address word = value::to_u64(std::span(c.value).subspan(off, 8));
      if (word == 0) continue;
      const AllocationRecord* r = mem.allocation_at(word);
      if (r && r->live && r->bead != owner)
        edges.push_back(Edge{owner, r->bead, "address " + hex(word) + " stored at " + hex(c.address + off)});
    }
  };
  for (const auto& b : t.beads()) {
    if (!b.live) continue;
    for (const auto& [name, cell] : b.context) {
      BeadId owner = mem.cell(cell).owner;
      if (owner != b.id) edges.push_back(Edge{b.id, owner, "shared tuple member '" + name + "'"});
      scan(b.id, cell);
    }
  }
  for (const auto& r : mem.allocations())
    if (r.live) scan(r.bead, r.cell);
  return edges;
}

Island complete(const Runtime& rt, std::set<BeadId> beads) {
  Island island;
  island.beads = std::move(beads);
  for (const auto& w : rt.tapestry().weaves()) {
    if (!w.live) continue;
    if (std::any_of(w.beads.begin(), w.beads.end(), [&](BeadId b) { return island.beads.count(b) > 0; }))
      island.weaves.insert(w.id);
  }
  for (const auto& s : rt.tapestry().strings())
    if (s.state.status != StringStatus::Detached && island.weaves.count(s.weave)) island.strings.insert(s.id);
  return island;
}

}  // namespace

std::vector<Island> identify_islands(const Runtime& rt, const std::vector<std::set<BeadId>>& hints) {
  const Tapestry& t = rt.tapestry();
  auto edges = bead_edges(rt);
  std::vector<Island> out;
  if (!hints.empty()) {
    for (const auto& hint : hints) {
      if (hint.empty()) throw Error(ErrorCode::InvalidArgument, "empty island hint");
      for (BeadId b : hint) (void)t.bead(b);
      for (const auto& e : edges) {
        bool in_a = hint.count(e.a) > 0;
        bool in_b = hint.count(e.b) > 0;
        if (in_a != in_b)
          throw Error(ErrorCode::NotClosed, "bead " + t.bead(e.a).label + " -- bead " + t.bead(e.b).label + " via " + e.via);
      }
      out.push_back(complete(rt, hint));
    }
    return out;
  }
  std::vector<std::uint32_t> parent(t.beads().size());
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : edges) {
    auto a = find(e.a.value);
    auto b = find(e.b.value);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<std::uint32_t, std::set<BeadId>> groups;
  for (const auto& b : t.beads())
    if (b.live) groups[find(b.id.value)].insert(b.id);
  for (auto& [root, beads] : groups) out.push_back(complete(rt, std::move(beads)));
  return out;
}

MigrationResult migrate_island(Runtime& src, Runtime& dst, const Island& requested) {
  if (src.in_step() || dst.in_step()) throw Error(ErrorCode::ScopeMidStep, "migration runs between dispatches");
  Island island = identify_islands(src, {requested.beads}).front();
  Tapestry& st = src.tapestry();
  Tapestry& dt = dst.tapestry();
  Memory& sm = src.memory();
  Memory& dm = dst.memory();

  // Validate everything before touching either side.
  std::map<ModuleId, ModuleId> modules;
  for (BeadId b : island.beads) {
    const auto& name = st.module(st.bead(b).module).def.name;
    auto m = dt.find_module(name);
    if (!m) throw Error(ErrorCode::MissingModule, "destination lacks module '" + name + "'");
    modules[st.bead(b).module] = *m;
    if (dt.find_bead(st.bead(b).label))
      throw Error(ErrorCode::InvalidDefinition, "destination already has a bead labelled '" + st.bead(b).label + "'");
  }
  for (WeaveId w : island.weaves)
    if (dt.find_weave(st.weave(w).label))
      throw Error(ErrorCode::InvalidDefinition, "destination already has a weave labelled '" + st.weave(w).label + "'");
  for (const auto& l : src.locks().locks()) {
    if (island.strings.count(l.holder))
      throw Error(ErrorCode::NotClosed, "string " + std::to_string(l.holder.value) + " holds lock " + l.name);
    for (StringId s : l.waiters)
      if (island.strings.count(s))
        throw Error(ErrorCode::NotClosed, "string " + std::to_string(s.value) + " waits on lock " + l.name);
  }
  std::vector<std::pair<WeaveId, std::pair<std::string, FunctionHandle>>> overrides;
  for (WeaveId w : island.weaves) {
    for (const auto& [name, binding] : src.names().table(w).functions()) {
      auto fallback = st.module(st.bead(binding.bead).module).function(name);
      if (binding.impl == fallback) continue;
      auto m = dt.find_module(binding.impl->module);
      if (!m) throw Error(ErrorCode::MissingModule, "destination lacks module '" + binding.impl->module + "'");
      auto impl = dt.module(*m).function(binding.impl->name);
      if (!impl) throw Error(ErrorCode::MissingModule, "destination module lacks '" + binding.impl->name + "'");
      overrides.push_back({w, {name, impl}});
    }
  }
  std::set<CellId> cells;
  for (BeadId b : island.beads)
    for (const auto& [name, cell] : st.bead(b).context) cells.insert(cell);
  std::vector<const AllocationRecord*> allocs;
  for (const auto& r : sm.allocations())
    if (r.live && island.beads.count(r.bead)) allocs.push_back(&r);
  MigrationResult result;
  for (CellId c : cells) result.bytes += std::max<std::uint64_t>(sm.cell(c).value.size(), 8);
  for (const auto* r : allocs) result.bytes += r->size;
  dm.region().host(result.bytes);

  // Beads and their global cells at their original addresses.
  {
    std::uint32_t next = static_cast<std::uint32_t>(dt.beads().size());
    for (BeadId b : island.beads) result.beads[b] = BeadId{next++};
  }
  std::map<CellId, CellId> cell_map;
  for (BeadId b : island.beads) {
    const auto& bead = st.bead(b);
    std::vector<std::pair<std::string, CellId>> context;
    for (const auto& [name, cell] : bead.context) {
      auto it = cell_map.find(cell);
      if (it == cell_map.end()) {
        const Cell& c = sm.cell(cell);
        it = cell_map.emplace(cell, dm.adopt_cell(result.beads.at(c.owner), c.value, c.address, false, c.live)).first;
      }
      context.emplace_back(name, it->second);
    }
    dt.add_bead(modules.at(bead.module), bead.label, std::move(context));
  }
  std::map<StringId, StringId> string_ids;
  {
    std::uint32_t next = static_cast<std::uint32_t>(dt.strings().size());
    for (StringId s : island.strings) string_ids[s] = StringId{next++};
  }
  for (const auto* r : allocs) {
    StringId by = string_ids.count(r->by_string) ? string_ids.at(r->by_string) : StringId{};
    dm.adopt_allocation(result.beads.at(r->bead), r->start, sm.cell(r->cell).value, by);
  }
  for (WeaveId w : island.weaves) {
    std::vector<BeadId> beads;
    for (BeadId b : st.weave(w).beads) beads.push_back(result.beads.at(b));
    result.weaves[w] = dst.define_weave(std::move(beads), st.weave(w).label);
  }
  for (const auto& [w, o] : overrides) dst.names().rebind(result.weaves.at(w), o.first, o.second);

  for (StringId s : island.strings) {
    const auto& old = st.string(s);
    StringRecord rec;
    rec.weave = result.weaves.at(old.weave);
    rec.entry = old.entry;
    rec.entry_module = modules.at(old.entry_module);
    rec.entry_bead = result.beads.at(old.entry_bead);
    rec.program = dt.module(rec.entry_module).entry(old.entry)->program;
    rec.state = old.state;
    for (auto& f : rec.state.bead_stack) f.bead = result.beads.at(f.bead);
    for (const auto& [cell, bytes] : old.context_frame)
      rec.context_frame.emplace_back(cell_map.count(cell) ? cell_map.at(cell) : CellId{}, bytes);
    rec.steps = old.steps;
    StringId id = dt.add_string(std::move(rec)).id;
    result.strings[s] = id;
  }

  // Retire the source copy.
  for (StringId s : island.strings) st.string_mut(s).state.status = StringStatus::Detached;
  for (WeaveId w : island.weaves) {
    src.names().drop(w);
    st.weave_mut(w).live = false;
  }
  for (const auto* r : allocs) sm.evict(r->cell);
  for (CellId c : cells) sm.evict(c);
  for (BeadId b : island.beads) st.bead_mut(b).live = false;
  src.invalidate();
  dst.invalidate();
  return result;
}

}  // namespace weaves
