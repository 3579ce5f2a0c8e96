#include "weaves/locks.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "weaves/error.hpp"
#include "weaves/serialize.hpp"

namespace weaves {

LockId LockTable::create(std::string name) {
  LockId id{static_cast<std::uint32_t>(locks_.size())};
  if (name.empty()) name = "lock" + std::to_string(id.value);
  names_.emplace(name, id);
  locks_.push_back(LockRecord{id, std::move(name), {}, {}});
  return id;
}

LockId LockTable::ensure(std::string_view name) {
  if (auto id = find(name)) return *id;
  return create(std::string(name));
}

std::optional<LockId> LockTable::find(std::string_view name) const {
  auto it = names_.find(name);
  if (it == names_.end()) return std::nullopt;
  return it->second;
}

const LockRecord& LockTable::lock(LockId id) const {
  if (!id.valid() || id.index() >= locks_.size()) throw Error(ErrorCode::UnknownLock, "lock " + std::to_string(id.value));
  return locks_[id.index()];
}

LockRecord& LockTable::get(LockId id) { return const_cast<LockRecord&>(lock(id)); }

bool LockTable::request(StringId s, LockId id) {
  auto& l = get(id);
  if (l.holder == s) return true;
  if (!l.holder.valid()) {
    l.holder = s;
    return true;
  }
  if (std::find(l.waiters.begin(), l.waiters.end(), s) == l.waiters.end()) l.waiters.push_back(s);
  return false;
}

StringId LockTable::release(StringId s, LockId id) {
  auto& l = get(id);
  if (l.holder != s)
    throw Error(ErrorCode::NotHolder, "string " + std::to_string(s.value) + " does not hold " + l.name);
  l.holder = StringId{};
  if (l.waiters.empty()) return StringId{};
  l.holder = l.waiters.front();
  l.waiters.pop_front();
  return l.holder;
}

void LockTable::withdraw(StringId s, LockId id) {
  auto& l = get(id);
  std::erase(l.waiters, s);
}

Bytes LockTable::serialize() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(locks_.size()));
  for (const auto& l : locks_) {
    w.str(l.name);
    w.u32(l.holder.value);
    w.u32(static_cast<std::uint32_t>(l.waiters.size()));
    for (StringId s : l.waiters) w.u32(s.value);
  }
  return std::move(w).take();
}

void LockTable::load(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  std::uint32_t n = r.u32();
  std::vector<LockRecord> locks;
  std::map<std::string, LockId, std::less<>> names;
  for (std::uint32_t i = 0; i < n; ++i) {
    LockRecord l;
    l.id = LockId{i};
    l.name = r.str();
    l.holder = StringId{r.u32()};
    std::uint32_t k = r.u32();
    for (std::uint32_t j = 0; j < k; ++j) l.waiters.push_back(StringId{r.u32()});
    names.emplace(l.name, l.id);
    locks.push_back(std::move(l));
  }
  locks_ = std::move(locks);
  names_ = std::move(names);
}

std::vector<WaitEdge> build_wait_graph(const LockTable& locks) {
  std::vector<WaitEdge> edges;
  for (const auto& l : locks.locks()) {
    if (!l.holder.valid()) continue;
    for (StringId w : l.waiters) edges.push_back(WaitEdge{w, l.id, l.holder});
  }
  return edges;
}

std::optional<std::vector<WaitEdge>> detect_deadlock(std::span<const WaitEdge> edges) {
  std::map<StringId, std::vector<const WaitEdge*>> out;
  std::set<StringId> vertices;
  for (const auto& e : edges) {
    out[e.waiter].push_back(&e);
    vertices.insert(e.waiter);
    vertices.insert(e.holder);
  }
  for (auto& [v, list] : out)
    std::sort(list.begin(), list.end(), [](const WaitEdge* a, const WaitEdge* b) {
      return std::tie(a->holder, a->lock) < std::tie(b->holder, b->lock);
    });

  // Iterative DFS with white/grey/black colouring; the first back edge
  // closes a cycle that is read off the current path.
  enum class Colour { White, Grey, Black };
  std::map<StringId, Colour> colour;
  for (StringId v : vertices) colour[v] = Colour::White;

  for (StringId root : vertices) {
    if (colour[root] != Colour::White) continue;
    std::vector<std::pair<StringId, std::size_t>> stack{{root, 0}};
    std::vector<const WaitEdge*> path;
    colour[root] = Colour::Grey;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      auto it = out.find(v);
      if (it == out.end() || next >= it->second.size()) {
        colour[v] = Colour::Black;
        stack.pop_back();
        if (!path.empty()) path.pop_back();
        continue;
      }
      const WaitEdge* e = it->second[next++];
      if (colour[e->holder] == Colour::Grey) {
        std::vector<WaitEdge> cycle;
        auto start = std::find_if(path.begin(), path.end(), [&](const WaitEdge* p) { return p->waiter == e->holder; });
        for (auto p = start; p != path.end(); ++p) cycle.push_back(**p);
        cycle.push_back(*e);
        auto lowest = std::min_element(cycle.begin(), cycle.end(),
                                       [](const WaitEdge& a, const WaitEdge& b) { return a.waiter < b.waiter; });
        std::rotate(cycle.begin(), lowest, cycle.end());
        return cycle;
      }
      if (colour[e->holder] == Colour::White) {
        colour[e->holder] = Colour::Grey;
        path.push_back(e);
        stack.emplace_back(e->holder, 0);
      }
    }
  }
  return std::nullopt;
}

}  // namespace weaves
